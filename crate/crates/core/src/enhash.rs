//! Streaming classifier built from an ensemble of projection hashes.
//!
//! Every estimator keeps, per bucket and per class, a decayed and
//! normalized count, the time the class last hit the bucket, and the raw
//! count and vector sum of the class's samples in the bucket. Prediction
//! sums `ln(1 + 2^(-lambda * dt) * count / dist)` over estimators, where
//! `dist` is the distance to the class mean inside the bucket.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::ProjectionEstimator;
use crate::numeric::euclidean;
use crate::rng::RngSpec;
use crate::streams::StreamSample;

/// Distances to a class mean are floored here before dividing.
pub const DIST_FLOOR: f64 = 1e-12;

/// Substream family used for random tie-breaking.
const TIE_STREAM: u64 = 0x7469_6573;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Distance-weighted class votes, ties to the earliest-seen class.
    #[default]
    Full,
    /// Votes ignore the distance to class means; ties broken at random
    /// (seeded).
    NoWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhashParams {
    pub estimators: usize,
    pub bin_width: f64,
    pub lambda: f64,
    pub variant: Variant,
}

impl Default for EnhashParams {
    fn default() -> Self {
        Self {
            estimators: 10,
            bin_width: 0.1,
            lambda: 0.015,
            variant: Variant::Full,
        }
    }
}

impl EnhashParams {
    pub fn validate(&self) -> Result<()> {
        if self.estimators == 0 {
            return Err(Error::param("L", "must be at least 1"));
        }
        if !(self.bin_width > 0.0 && self.bin_width.is_finite()) {
            return Err(Error::param("bin_width", format!("must be positive, got {}", self.bin_width)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::param("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ClassCell {
    /// Index into the model's class registry.
    class: usize,
    count: f64,
    tstamp: u64,
    samples: u64,
    sum: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct Bucket {
    cells: Vec<ClassCell>,
}

impl Bucket {
    fn last_access(&self) -> Option<u64> {
        self.cells.iter().map(|c| c.tstamp).max()
    }
}

#[derive(Debug, Clone)]
struct EstimatorState {
    hash: ProjectionEstimator,
    buckets: HashMap<i64, Bucket>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// `None` before any class has been seen.
    pub class: Option<usize>,
    /// Accumulated weight per registered class, in registry order.
    pub weights: Vec<(usize, f64)>,
    /// `2^(-lambda * dt)` for every estimator whose bucket was non-empty.
    pub decay_factors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EnhashModel {
    params: EnhashParams,
    rng: RngSpec,
    dim: usize,
    estimators: Vec<EstimatorState>,
    t: u64,
    /// External class labels in first-seen order.
    classes: Vec<usize>,
    last_buckets: Vec<i64>,
    last_update_decays: Vec<f64>,
}

impl EnhashModel {
    pub fn new(params: EnhashParams, rng: RngSpec, dim: usize) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        let estimators = (0..params.estimators)
            .map(|l| {
                let mut r = rng.substream(l as u64);
                Ok(EstimatorState {
                    hash: ProjectionEstimator::sample_gaussian(&mut r, dim, params.bin_width)?,
                    buckets: HashMap::new(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params,
            rng,
            dim,
            estimators,
            t: 0,
            classes: Vec::new(),
            last_buckets: Vec::new(),
            last_update_decays: Vec::new(),
        })
    }

    pub fn params(&self) -> &EnhashParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Samples processed so far.
    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn hash(&self, estimator: usize) -> &ProjectionEstimator {
        &self.estimators[estimator].hash
    }

    /// Bucket hit by every estimator during the last update.
    pub fn last_updated_buckets(&self) -> &[i64] {
        &self.last_buckets
    }

    /// `2^(-lambda * dt)` applied to the updated class count in each estimator
    /// during the last update (1 for a class new to the bucket).
    pub fn last_update_decays(&self) -> &[f64] {
        &self.last_update_decays
    }

    /// `(class label, normalized count)` pairs of one bucket.
    pub fn bucket_weights(&self, estimator: usize, bucket: i64) -> Option<Vec<(usize, f64)>> {
        self.estimators[estimator]
            .buckets
            .get(&bucket)
            .map(|b| b.cells.iter().map(|c| (self.classes[c.class], c.count)).collect())
    }

    /// `(label, sample count, vector sum)` of every class in one bucket.
    pub fn bucket_accumulators(&self, estimator: usize, bucket: i64) -> Option<Vec<(usize, u64, Vec<f64>)>> {
        self.estimators[estimator].buckets.get(&bucket).map(|b| {
            b.cells
                .iter()
                .map(|c| (self.classes[c.class], c.samples, c.sum.clone()))
                .collect()
        })
    }

    pub fn bucket_timestamps(&self, estimator: usize, bucket: i64) -> Option<Vec<(usize, u64)>> {
        self.estimators[estimator]
            .buckets
            .get(&bucket)
            .map(|b| b.cells.iter().map(|c| (self.classes[c.class], c.tstamp)).collect())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn decay(&self, dt: u64) -> f64 {
        (-self.params.lambda * dt as f64).exp2()
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.check_dim(x)?;
        let mut weights = vec![0.0; self.classes.len()];
        let mut decay_factors = Vec::with_capacity(self.estimators.len());
        for est in &self.estimators {
            let b = est.hash.index(x)?;
            let Some(bucket) = est.buckets.get(&b) else {
                continue;
            };
            let Some(last) = bucket.last_access() else {
                continue;
            };
            let decay = self.decay(self.t - last);
            decay_factors.push(decay);
            for cell in &bucket.cells {
                let v = match self.params.variant {
                    Variant::Full => {
                        let inv = 1.0 / cell.samples as f64;
                        let mean: Vec<f64> = cell.sum.iter().map(|s| s * inv).collect();
                        let dist = euclidean(x, &mean).max(DIST_FLOOR);
                        decay * cell.count / dist
                    }
                    Variant::NoWeights => decay * cell.count,
                };
                weights[cell.class] += v.ln_1p();
            }
        }
        let class = self.argmax(&weights).map(|c| self.classes[c]);
        Ok(Prediction {
            class,
            weights: self.classes.iter().copied().zip(weights).collect(),
            decay_factors,
        })
    }

    fn argmax(&self, weights: &[f64]) -> Option<usize> {
        let best = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut tied = (0..weights.len()).filter(|&c| weights[c] == best);
        match self.params.variant {
            Variant::Full => tied.next(),
            Variant::NoWeights => {
                let tied: Vec<usize> = tied.collect();
                match tied.len() {
                    0 => None,
                    1 => Some(tied[0]),
                    k => {
                        let mut r = self.rng.with_stream(TIE_STREAM).substream(self.t);
                        Some(tied[r.random_range(0..k)])
                    }
                }
            }
        }
    }

    fn register(&mut self, label: usize) -> usize {
        match self.classes.iter().position(|&c| c == label) {
            Some(i) => i,
            None => {
                self.classes.push(label);
                self.classes.len() - 1
            }
        }
    }

    /// Adds `(x, y)` to every estimator's bucket. Does not advance time.
    pub fn update(&mut self, x: &[f64], y: usize) -> Result<()> {
        self.check_dim(x)?;
        let class = self.register(y);
        let t = self.t;
        let lambda = self.params.lambda;
        self.last_buckets.clear();
        self.last_update_decays.clear();
        for est in &mut self.estimators {
            let b = est.hash.index(x)?;
            let bucket = est.buckets.entry(b).or_default();
            let decay = match bucket.cells.iter_mut().find(|c| c.class == class) {
                Some(cell) => {
                    let decay = (-lambda * (t - cell.tstamp) as f64).exp2();
                    cell.count = 1.0 + decay * cell.count;
                    cell.tstamp = t;
                    cell.samples += 1;
                    cell.sum.iter_mut().zip(x).for_each(|(s, v)| *s += v);
                    decay
                }
                None => {
                    bucket.cells.push(ClassCell {
                        class,
                        count: 1.0,
                        tstamp: t,
                        samples: 1,
                        sum: x.to_vec(),
                    });
                    1.0
                }
            };
            let total: f64 = bucket.cells.iter().map(|c| c.count).sum();
            for cell in &mut bucket.cells {
                cell.count /= total;
            }
            self.last_buckets.push(b);
            self.last_update_decays.push(decay);
        }
        Ok(())
    }

    /// Predict from the current state, learn `(x, y)`, then advance time.
    pub fn step(&mut self, x: &[f64], y: usize) -> Result<Prediction> {
        let prediction = self.predict(x)?;
        self.update(x, y)?;
        self.t += 1;
        Ok(prediction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub samples: usize,
    pub errors: usize,
    /// Misclassified percentage over all steps.
    pub error_pct: f64,
    pub kappa_m: Option<f64>,
    pub kappa_t: Option<f64>,
    pub wall_time_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    /// Trailing-window error rate after every step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windowed_error: Option<Vec<f64>>,
}

fn kappa(p0: f64, baseline: f64) -> Option<f64> {
    (baseline < 1.0).then(|| (p0 - baseline) / (1.0 - baseline))
}

/// Trailing-window error rate after each step (window shrinks at the start).
pub fn windowed_error(mistakes: &[bool], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(mistakes.len());
    let mut in_window = 0usize;
    for i in 0..mistakes.len() {
        in_window += usize::from(mistakes[i]);
        if i >= window {
            in_window -= usize::from(mistakes[i - window]);
        }
        out.push(in_window as f64 / (i + 1).min(window) as f64);
    }
    out
}

/// Interleaved test-then-train evaluation.
///
/// KappaM compares against always predicting the stream's overall majority
/// class; KappaT against predicting the previous label (first sample a
/// miss). A kappa is `None` when its baseline is perfect.
pub fn prequential_evaluate<I>(params: EnhashParams, rng: RngSpec, stream: I, window: Option<usize>) -> Result<EvalReport>
where
    I: IntoIterator<Item = StreamSample>,
{
    if window == Some(0) {
        return Err(Error::param("window", "must be at least 1"));
    }
    let start = Instant::now();
    let mut model: Option<EnhashModel> = None;
    let mut mistakes = Vec::new();
    let mut labels = Vec::new();
    for sample in stream {
        let m = match model.as_mut() {
            Some(m) => m,
            None => model.insert(EnhashModel::new(params, rng, sample.x.len())?),
        };
        let pred = m.step(&sample.x, sample.y)?;
        mistakes.push(pred.class != Some(sample.y));
        labels.push(sample.y);
    }
    let wall_time_secs = start.elapsed().as_secs_f64();
    let n = labels.len();
    if n < 2 {
        return Err(Error::Empty(format!("stream needs at least 2 samples, got {n}")));
    }

    let errors = mistakes.iter().filter(|&&m| m).count();
    let p0 = 1.0 - errors as f64 / n as f64;
    let mut freq: HashMap<usize, usize> = HashMap::new();
    for &y in &labels {
        *freq.entry(y).or_default() += 1;
    }
    let p_maj = *freq.values().max().unwrap_or(&0) as f64 / n as f64;
    let persistent_hits = labels.windows(2).filter(|w| w[0] == w[1]).count();
    let p_per = persistent_hits as f64 / n as f64;

    Ok(EvalReport {
        samples: n,
        errors,
        error_pct: 100.0 * errors as f64 / n as f64,
        kappa_m: kappa(p0, p_maj),
        kappa_t: kappa(p0, p_per),
        wall_time_secs,
        window,
        windowed_error: window.map(|w| windowed_error(&mistakes, w)),
    })
}
