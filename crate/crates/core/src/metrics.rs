//! Ranking metrics for outlier scores and Friedman ranking of methods.
//!
//! Rank-based metrics (P@n, AP) sort by descending score and break ties by
//! original row index. ROC-AUC counts tied (outlier, inlier) pairs as 1/2.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::exact_sum;

#[derive(Debug, Clone)]
pub struct RankedScores {
    scores: Vec<f64>,
    outliers: Vec<bool>,
    /// Row indices from rank 1 to rank N.
    order: Vec<usize>,
    /// 1-based rank of each row.
    ranks: Vec<usize>,
    n_outliers: usize,
}

impl RankedScores {
    pub fn new(scores: Vec<f64>, outliers: Vec<bool>) -> Result<Self> {
        if scores.len() != outliers.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: outliers.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::Empty("no scores".into()));
        }
        if let Some(v) = scores.iter().find(|v| v.is_nan()) {
            return Err(Error::param("scores", format!("unrankable score {v}")));
        }
        let mut order: Vec<usize> = (0..scores.len()).collect();
        // Stable sort keeps index order inside ties.
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let mut ranks = vec![0; scores.len()];
        for (pos, &i) in order.iter().enumerate() {
            ranks[i] = pos + 1;
        }
        let n_outliers = outliers.iter().filter(|&&o| o).count();
        Ok(Self {
            scores,
            outliers,
            order,
            ranks,
            n_outliers,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn outliers(&self) -> &[bool] {
        &self.outliers
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_outliers(&self) -> usize {
        self.n_outliers
    }

    fn require_outliers(&self) -> Result<()> {
        if self.n_outliers == 0 {
            return Err(Error::Undefined("metric undefined without outliers".into()));
        }
        Ok(())
    }

    fn chance(&self) -> Result<f64> {
        if self.n_outliers == self.len() {
            return Err(Error::Undefined(
                "adjusted metric undefined when every point is an outlier".into(),
            ));
        }
        Ok(self.n_outliers as f64 / self.len() as f64)
    }

    /// Fraction of the top `n` ranks held by outliers; `n` defaults to the
    /// number of outliers.
    pub fn precision_at_n(&self, n: Option<usize>) -> Result<f64> {
        self.require_outliers()?;
        let n = n.unwrap_or(self.n_outliers);
        if n == 0 || n > self.len() {
            return Err(Error::param("n", format!("must lie in 1..={}, got {n}", self.len())));
        }
        let hits = self.order[..n].iter().filter(|&&i| self.outliers[i]).count();
        Ok(hits as f64 / n as f64)
    }

    pub fn adjusted_precision_at_n(&self, n: Option<usize>) -> Result<f64> {
        let p = self.precision_at_n(n)?;
        let c = self.chance()?;
        Ok((p - c) / (1.0 - c))
    }

    /// Mean over outliers of the precision at that outlier's rank.
    pub fn average_precision(&self) -> Result<f64> {
        self.require_outliers()?;
        // Each term k / (rank * |O|) is split into its rounded quotient and
        // the rounded remainder, so the sum avoids a second rounding step.
        let n_o = self.n_outliers as f64;
        let mut parts = Vec::with_capacity(2 * self.n_outliers);
        let mut seen = 0usize;
        for (pos, &i) in self.order.iter().enumerate() {
            if self.outliers[i] {
                seen += 1;
                let k = seen as f64;
                let den = (pos + 1) as f64 * n_o;
                let q = k / den;
                parts.push(q);
                parts.push((-q).mul_add(den, k) / den);
            }
        }
        Ok(exact_sum(parts))
    }

    pub fn adjusted_average_precision(&self) -> Result<f64> {
        let ap = self.average_precision()?;
        let c = self.chance()?;
        Ok((ap - c) / (1.0 - c))
    }

    /// Mann-Whitney form with mid-ranks, kept in integers (doubled ranks)
    /// until the final division.
    pub fn roc_auc(&self) -> Result<f64> {
        let n_o = self.n_outliers as u128;
        let n_i = (self.len() - self.n_outliers) as u128;
        if n_o == 0 || n_i == 0 {
            return Err(Error::Undefined("ROC-AUC needs both outliers and inliers".into()));
        }
        let mut asc: Vec<usize> = (0..self.len()).collect();
        asc.sort_by(|&a, &b| self.scores[a].total_cmp(&self.scores[b]));
        let mut doubled_rank_sum: u128 = 0;
        let mut start = 0;
        while start < asc.len() {
            let mut end = start + 1;
            while end < asc.len() && self.scores[asc[end]] == self.scores[asc[start]] {
                end += 1;
            }
            // Positions start+1 ..= end share the mid-rank (start + 1 + end) / 2.
            let doubled = (start + 1 + end) as u128;
            let pos_in_group = asc[start..end].iter().filter(|&&i| self.outliers[i]).count() as u128;
            doubled_rank_sum += doubled * pos_in_group;
            start = end;
        }
        let numerator = doubled_rank_sum - n_o * (n_o + 1);
        Ok(numerator as f64 / (2 * n_o * n_i) as f64)
    }

    pub fn report(&self, n: Option<usize>) -> Result<OutlierMetrics> {
        Ok(OutlierMetrics {
            n: n.unwrap_or(self.n_outliers),
            precision_at_n: self.precision_at_n(n)?,
            adjusted_precision_at_n: self.adjusted_precision_at_n(n)?,
            average_precision: self.average_precision()?,
            adjusted_average_precision: self.adjusted_average_precision()?,
            roc_auc: self.roc_auc()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierMetrics {
    pub n: usize,
    pub precision_at_n: f64,
    pub adjusted_precision_at_n: f64,
    pub average_precision: f64,
    pub adjusted_average_precision: f64,
    pub roc_auc: f64,
}

/// One evaluation measure for several methods across several datasets.
/// `None` marks a method that produced no result on a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodMeasureTable {
    pub methods: Vec<String>,
    pub datasets: Vec<String>,
    /// `values[method][dataset]`
    pub values: Vec<Vec<Option<f64>>>,
    pub higher_is_better: bool,
}

impl MethodMeasureTable {
    /// Reads `method,<dataset>...` rows. Empty, `NA` or `NaN` cells are
    /// missing.
    pub fn read_csv<R: Read>(reader: R, higher_is_better: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let datasets: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
        let mut methods = Vec::new();
        let mut values = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let mut cells = record.iter();
            methods.push(cells.next().unwrap_or("").trim().to_string());
            let mut row = Vec::with_capacity(datasets.len());
            for (c, cell) in cells.enumerate() {
                let cell = cell.trim();
                let v = match cell.to_ascii_lowercase().as_str() {
                    "" | "na" | "nan" => None,
                    _ => Some(cell.parse::<f64>().map_err(|_| Error::NonNumeric {
                        row: r + 1,
                        column: datasets.get(c).cloned().unwrap_or_default(),
                        value: cell.to_string(),
                    })?),
                };
                row.push(v.filter(|x| x.is_finite()));
            }
            if row.len() != datasets.len() {
                return Err(Error::Ragged {
                    row: r + 1,
                    found: row.len() + 1,
                    expected: datasets.len() + 1,
                });
            }
            values.push(row);
        }
        let table = Self {
            methods,
            datasets,
            values,
            higher_is_better,
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.datasets.is_empty() {
            return Err(Error::Empty("ranking table has no methods or no datasets".into()));
        }
        for (d, name) in self.datasets.iter().enumerate() {
            if self.values.iter().all(|row| row.get(d).copied().flatten().is_none()) {
                return Err(Error::Empty(format!("dataset {name:?} has no method values")));
            }
        }
        Ok(())
    }

    /// Rank of every method on every dataset (1 = best, ties averaged,
    /// missing entries excluded).
    pub fn dataset_ranks(&self) -> Result<Vec<Vec<Option<f64>>>> {
        self.validate()?;
        let mut out = vec![vec![None; self.datasets.len()]; self.methods.len()];
        for d in 0..self.datasets.len() {
            let mut present: Vec<(usize, f64)> = self
                .values
                .iter()
                .enumerate()
                .filter_map(|(m, row)| row[d].map(|v| (m, v)))
                .collect();
            if self.higher_is_better {
                present.sort_by(|a, b| b.1.total_cmp(&a.1));
            } else {
                present.sort_by(|a, b| a.1.total_cmp(&b.1));
            }
            let mut start = 0;
            while start < present.len() {
                let mut end = start + 1;
                while end < present.len() && present[end].1 == present[start].1 {
                    end += 1;
                }
                let mean_rank = (start + 1 + end) as f64 / 2.0;
                for &(m, _) in &present[start..end] {
                    out[m][d] = Some(mean_rank);
                }
                start = end;
            }
        }
        Ok(out)
    }

    /// Mean rank of each method over the datasets where it has a value.
    pub fn friedman_ranks(&self) -> Result<Vec<Option<f64>>> {
        Ok(self
            .dataset_ranks()?
            .into_iter()
            .map(|row| {
                let present: Vec<f64> = row.into_iter().flatten().collect();
                (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
            })
            .collect())
    }
}
