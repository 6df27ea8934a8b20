//! Projection-hash rareness scoring with explicit bin-width control, and
//! scoring of unseen points against a fitted model.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::fire::aggregate_scores;
use crate::hashing::ProjectionEstimator;
use crate::numeric::exact_sum;
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fire1Params {
    pub estimators: usize,
    pub sampled_dims: usize,
    pub bin_width: f64,
}

impl Fire1Params {
    /// `L = 100`, bin width `0.1`; `M` must be chosen per dataset.
    pub fn with_dims(sampled_dims: usize) -> Self {
        Self {
            estimators: 100,
            sampled_dims,
            bin_width: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.estimators == 0 {
            return Err(Error::param("L", "must be at least 1"));
        }
        if self.sampled_dims == 0 {
            return Err(Error::param("M", "must be at least 1"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::param("bin_width", format!("must be positive, got {}", self.bin_width)));
        }
        Ok(())
    }
}

/// Candidate `M` values for a `d`-dimensional dataset:
/// `{ceil(ln d), ceil(sqrt d), ceil(d/2), d, ceil(1.5 d)}`, each at least 1.
pub fn sampled_dims_grid(d: usize) -> [usize; 5] {
    let df = d as f64;
    let c = |v: f64| (v.ceil() as usize).max(1);
    [c(df.ln()), c(df.sqrt()), c(df / 2.0), d.max(1), c(1.5 * df)]
}

/// Bin widths tried during tuning.
pub const BIN_WIDTH_GRID: [f64; 16] = [
    10.0, 9.0, 8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0, 1.0, 0.1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6,
];

mod sorted_tables {
    use std::collections::HashMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(tables: &[HashMap<i64, u32>], s: S) -> Result<S::Ok, S::Error> {
        let sorted: Vec<Vec<(i64, u32)>> = tables
            .iter()
            .map(|t| {
                let mut v: Vec<(i64, u32)> = t.iter().map(|(&k, &c)| (k, c)).collect();
                v.sort_unstable();
                v
            })
            .collect();
        sorted.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<HashMap<i64, u32>>, D::Error> {
        let sorted: Vec<Vec<(i64, u32)>> = Vec::deserialize(d)?;
        Ok(sorted.into_iter().map(|v| v.into_iter().collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEnsemble {
    pub params: Fire1Params,
    pub rng: RngSpec,
    pub dim: usize,
    pub trained_n: usize,
    pub estimators: Vec<ProjectionEstimator>,
    /// Per estimator: bucket id -> number of training rows.
    #[serde(with = "sorted_tables")]
    pub bucket_tables: Vec<HashMap<i64, u32>>,
}

impl ProjectionEnsemble {
    pub fn indices(&self, row: &[f64]) -> Result<Vec<i64>> {
        self.estimators.iter().map(|e| e.index(row)).collect()
    }

    /// Stored parameter and bucket cells; bounded by `L * (2M + N)`.
    pub fn space_cells(&self) -> usize {
        self.estimators
            .iter()
            .zip(&self.bucket_tables)
            .map(|(e, t)| e.feature_indices.len() + e.weights.len() + t.len())
            .sum()
    }
}

#[derive(Debug, Clone)]
pub struct Fire1ScoreReport {
    pub scores: Vec<f64>,
    /// `N x L`, row-major.
    pub neighborhoods: Vec<f64>,
    pub estimators: usize,
}

impl Fire1ScoreReport {
    pub fn neighborhood(&self, row: usize, estimator: usize) -> f64 {
        self.neighborhoods[row * self.estimators + estimator]
    }
}

fn bucket_ids(est: &ProjectionEstimator, data: &DataMatrix) -> Result<Vec<i64>> {
    data.iter_rows().map(|row| est.index(row)).collect()
}

pub fn fit_fire1(data: &DataMatrix, params: Fire1Params, rng: RngSpec) -> Result<ProjectionEnsemble> {
    params.validate()?;
    let built = (0..params.estimators)
        .into_par_iter()
        .map(|l| {
            let mut r = rng.substream(l as u64);
            let est = ProjectionEstimator::sample_subspace(
                &mut r,
                data.feature_mins(),
                data.feature_maxs(),
                params.sampled_dims,
                params.bin_width,
            )?;
            let mut table = HashMap::new();
            for id in bucket_ids(&est, data)? {
                *table.entry(id).or_insert(0u32) += 1;
            }
            Ok((est, table))
        })
        .collect::<Result<Vec<_>>>()?;
    let (estimators, bucket_tables) = built.into_iter().unzip();
    Ok(ProjectionEnsemble {
        params,
        rng,
        dim: data.cols(),
        trained_n: data.rows(),
        estimators,
        bucket_tables,
    })
}

/// Scores `data` by bucket occupancy within `data` itself. For the
/// training set this is exactly the fitted bucket tables.
pub fn score_fire1(data: &DataMatrix, ensemble: &ProjectionEnsemble) -> Result<Fire1ScoreReport> {
    data.check_cols(ensemble.dim)?;
    let n = data.rows();
    let counts = ensemble
        .estimators
        .par_iter()
        .map(|est| {
            let ids = bucket_ids(est, data)?;
            let mut table: HashMap<i64, u32> = HashMap::with_capacity(ids.len() / 2);
            for &id in &ids {
                *table.entry(id).or_insert(0) += 1;
            }
            Ok(ids.iter().map(|id| table[id]).collect::<Vec<u32>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let (scores, neighborhoods) = aggregate_scores(&counts, n, n as f64);
    Ok(Fire1ScoreReport {
        scores,
        neighborhoods,
        estimators: ensemble.estimators.len(),
    })
}

pub fn fit_score_fire1(
    data: &DataMatrix,
    params: Fire1Params,
    rng: RngSpec,
) -> Result<(ProjectionEnsemble, Fire1ScoreReport)> {
    let ens = fit_fire1(data, params, rng)?;
    let rep = score_fire1(data, &ens)?;
    Ok((ens, rep))
}

/// Scores new points against the training bucket tables with the smoothed
/// neighborhood `(1 + k) / (1 + N)`. The ensemble is not modified.
pub fn score_unseen(ensemble: &ProjectionEnsemble, new_data: &DataMatrix) -> Result<Vec<f64>> {
    new_data.check_cols(ensemble.dim)?;
    let ln_total = (ensemble.trained_n as f64 + 1.0).ln();
    new_data
        .iter_rows()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|row| {
            let terms = ensemble
                .estimators
                .iter()
                .zip(&ensemble.bucket_tables)
                .map(|(est, table)| {
                    let k = table.get(&est.index(row)?).copied().unwrap_or(0);
                    Ok((k as f64 + 1.0).ln() - ln_total)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(-2.0 * exact_sum(terms) + 0.0)
        })
        .collect()
}
