//! Sketch-based rareness scoring.
//!
//! Each of `L` estimators thresholds `M` sampled features into a bit vector
//! and hashes it modulo a prime `H`. A point's probabilistic neighborhood
//! under an estimator is the fraction of points sharing its bucket; the
//! score is `-2 * sum_l ln(neighborhood_l)`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::hashing::SketchEstimator;
use crate::numeric::{exact_sum, quantile_sorted};
use crate::rng::RngSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireParams {
    pub estimators: usize,
    pub sampled_dims: usize,
    pub modulus: u64,
}

impl Default for FireParams {
    fn default() -> Self {
        Self {
            estimators: 100,
            sampled_dims: 50,
            modulus: 1_017_881,
        }
    }
}

impl FireParams {
    pub fn validate(&self) -> Result<()> {
        if self.estimators == 0 {
            return Err(Error::param("L", "must be at least 1"));
        }
        if self.sampled_dims == 0 {
            return Err(Error::param("M", "must be at least 1"));
        }
        if self.modulus <= 1 || !crate::numeric::is_prime(self.modulus) {
            return Err(Error::param("H", format!("{} is not a prime > 1", self.modulus)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchEnsemble {
    pub params: FireParams,
    pub rng: RngSpec,
    /// Column count of the fitting data.
    pub dim: usize,
    pub trained_n: usize,
    pub estimators: Vec<SketchEstimator>,
}

impl SketchEnsemble {
    /// Bucket ids of one row under every estimator.
    pub fn indices(&self, row: &[f64]) -> Vec<u64> {
        self.estimators.iter().map(|e| e.index(row)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct FireScoreReport {
    pub scores: Vec<f64>,
    /// `N x L`, row-major: bucket occupancy / N.
    pub neighborhoods: Vec<f64>,
    pub estimators: usize,
    pub bucket_tables: Vec<HashMap<u64, u32>>,
}

impl FireScoreReport {
    pub fn neighborhood(&self, row: usize, estimator: usize) -> f64 {
        self.neighborhoods[row * self.estimators + estimator]
    }
}

pub fn fit_fire(data: &DataMatrix, params: FireParams, rng: RngSpec) -> Result<SketchEnsemble> {
    params.validate()?;
    let estimators = (0..params.estimators)
        .into_par_iter()
        .map(|l| {
            let mut r = rng.substream(l as u64);
            SketchEstimator::sample(
                &mut r,
                data.feature_mins(),
                data.feature_maxs(),
                params.sampled_dims,
                params.modulus,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SketchEnsemble {
        params,
        rng,
        dim: data.cols(),
        trained_n: data.rows(),
        estimators,
    })
}

/// Turns per-estimator bucket occupancies into scores. `counts` is
/// estimator-major (`counts[l][i]`). Each log term is `ln k - ln n`, summed
/// with correct rounding so results are independent of reduction order.
pub(crate) fn aggregate_scores(counts: &[Vec<u32>], n_rows: usize, total: f64) -> (Vec<f64>, Vec<f64>) {
    let l_count = counts.len();
    let ln_total = total.ln();
    let mut neighborhoods = vec![0.0; n_rows * l_count];
    let mut scores = Vec::with_capacity(n_rows);
    let mut terms = vec![0.0; l_count];
    for i in 0..n_rows {
        for (l, c) in counts.iter().enumerate() {
            let k = c[i] as f64;
            neighborhoods[i * l_count + l] = k / total;
            terms[l] = k.ln() - ln_total;
        }
        let s = -2.0 * exact_sum(terms.iter().copied());
        // -0.0 when every neighborhood is 1
        scores.push(s + 0.0);
    }
    (scores, neighborhoods)
}

pub fn score_fire(data: &DataMatrix, ensemble: &SketchEnsemble) -> Result<FireScoreReport> {
    data.check_cols(ensemble.dim)?;
    let n = data.rows();
    let per_estimator: Vec<(HashMap<u64, u32>, Vec<u32>)> = ensemble
        .estimators
        .par_iter()
        .map(|est| {
            let ids: Vec<u64> = data.iter_rows().map(|row| est.index(row)).collect();
            let mut table: HashMap<u64, u32> = HashMap::new();
            for &id in &ids {
                *table.entry(id).or_insert(0) += 1;
            }
            let counts = ids.iter().map(|id| table[id]).collect();
            (table, counts)
        })
        .collect();
    let (bucket_tables, counts): (Vec<_>, Vec<_>) = per_estimator.into_iter().unzip();
    let (scores, neighborhoods) = aggregate_scores(&counts, n, n as f64);
    Ok(FireScoreReport {
        scores,
        neighborhoods,
        estimators: ensemble.estimators.len(),
        bucket_tables,
    })
}

/// Flags rows with `score >= q3 + 1.5 * (q3 - q1)`, quartiles by linear
/// interpolation. Returns the threshold and the flags.
pub fn iqr_threshold(scores: &[f64]) -> (f64, Vec<bool>) {
    if scores.is_empty() {
        return (f64::NAN, Vec::new());
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let threshold = q3 + 1.5 * (q3 - q1);
    let flags = scores.iter().map(|&s| s >= threshold).collect();
    (threshold, flags)
}

/// F1 of the positive (outlier) class. Zero when precision + recall is zero.
pub fn f1_binary(predicted: &[bool], truth: &[bool]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}
