//! Wall-clock scaling measurements for the scorers.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::fire::{fit_fire, score_fire, FireParams};
use crate::fire1::{fit_score_fire1, Fire1Params};
use crate::rng::RngSpec;

/// Feature count of generated benchmark data.
pub const BENCH_DIM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum BenchAlgo {
    Fire(FireParams),
    Fire1(Fire1Params),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    /// Median over trials.
    pub seconds: f64,
    /// `seconds / previous row's seconds`.
    pub ratio: Option<f64>,
    /// SHA-256 over the score bit patterns; identical for identical work.
    pub scores_digest: String,
}

/// Standard-normal `n x BENCH_DIM` matrix from substream `n` of `seed`.
pub fn bench_data(n: usize, seed: u64) -> Result<DataMatrix> {
    let mut rng = RngSpec::new(seed).with_stream(1).substream(n as u64);
    let values = (0..n * BENCH_DIM).map(|_| StandardNormal.sample(&mut rng)).collect();
    DataMatrix::new(n, BENCH_DIM, values)
}

/// Fits and scores `data`, returning the scores.
pub fn run_scorer(algo: &BenchAlgo, data: &DataMatrix, rng: RngSpec) -> Result<Vec<f64>> {
    match algo {
        BenchAlgo::Fire(p) => {
            let ens = fit_fire(data, *p, rng)?;
            Ok(score_fire(data, &ens)?.scores)
        }
        BenchAlgo::Fire1(p) => Ok(fit_score_fire1(data, *p, rng)?.1.scores),
    }
}

fn digest(scores: &[f64]) -> String {
    let mut h = Sha256::new();
    for s in scores {
        h.update(s.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Times fit + score on seeded data for each size (data generation is not
/// timed). Sizes must be strictly ascending and at least two.
pub fn bench_scaling(algo: &BenchAlgo, sizes: &[usize], seed: u64, trials: usize) -> Result<Vec<BenchRow>> {
    if sizes.len() < 2 {
        return Err(Error::param("sizes", "need at least two sizes"));
    }
    if sizes.contains(&0) {
        return Err(Error::param("sizes", "sizes must be at least 1"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("sizes", "sizes must be strictly ascending"));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let rng = RngSpec::new(seed);
    let mut rows: Vec<BenchRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let data = bench_data(n, seed)?;
        let mut times = Vec::with_capacity(trials);
        let mut scores = Vec::new();
        for _ in 0..trials {
            let start = Instant::now();
            scores = run_scorer(algo, &data, rng)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let seconds = median(times);
        let ratio = rows.last().map(|prev| seconds / prev.seconds);
        rows.push(BenchRow {
            n,
            seconds,
            ratio,
            scores_digest: digest(&scores),
        });
    }
    Ok(rows)
}
