//! The two hash families: thresholded-bit sketches and quantized random
//! projections.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::is_prime;

/// Upper bound (inclusive) for sketch integer weights: `2^31 - 1`.
pub const MAX_INT_WEIGHT: u64 = (1 << 31) - 1;

/// One sketch hash: `M` sampled features, a threshold per sample, and an
/// integer weight per sample combined modulo a prime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SketchEstimator {
    pub feature_indices: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub int_weights: Vec<u64>,
    pub modulus: u64,
}

impl SketchEstimator {
    /// Draws `m` (feature, threshold, weight) triples. Thresholds are uniform
    /// over the selected feature's observed range.
    pub fn sample<R: Rng>(rng: &mut R, mins: &[f64], maxs: &[f64], m: usize, modulus: u64) -> Result<Self> {
        if modulus <= 1 || !is_prime(modulus) {
            return Err(Error::param("H", format!("{modulus} is not a prime > 1")));
        }
        let d = mins.len();
        let mut feature_indices = Vec::with_capacity(m);
        let mut thresholds = Vec::with_capacity(m);
        let mut int_weights = Vec::with_capacity(m);
        for _ in 0..m {
            let j = rng.random_range(0..d);
            feature_indices.push(j);
            thresholds.push(rng.random_range(mins[j]..=maxs[j]));
            int_weights.push(rng.random_range(1..=MAX_INT_WEIGHT));
        }
        Ok(Self {
            feature_indices,
            thresholds,
            int_weights,
            modulus,
        })
    }

    /// Bit `j` is set iff `row[feature_indices[j]] >= thresholds[j]`.
    pub fn bits<'a>(&'a self, row: &'a [f64]) -> impl Iterator<Item = bool> + 'a {
        self.feature_indices
            .iter()
            .zip(&self.thresholds)
            .map(move |(&f, &th)| row[f] >= th)
    }

    /// `sum_j bit_j * int_weights[j] mod H`, reduced after every addition.
    pub fn index(&self, row: &[f64]) -> u64 {
        let h = self.modulus;
        let mut acc = 0u64;
        for (bit, &w) in self.bits(row).zip(&self.int_weights) {
            if bit {
                let w = w % h;
                let (s, overflow) = acc.overflowing_add(w);
                acc = if overflow || s >= h { s.wrapping_sub(h) } else { s };
            }
        }
        acc
    }
}

/// One projection hash: `floor((sum_j row[f_j] * w_j + bias) / bin_width)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEstimator {
    pub feature_indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub bin_width: f64,
}

fn check_bin_width(bin_width: f64) -> Result<()> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::param("bin_width", format!("must be a positive finite number, got {bin_width}")));
    }
    Ok(())
}

impl ProjectionEstimator {
    /// Subspace projection: `m` features with replacement, each weight
    /// uniform over that feature's observed range.
    pub fn sample_subspace<R: Rng>(
        rng: &mut R,
        mins: &[f64],
        maxs: &[f64],
        m: usize,
        bin_width: f64,
    ) -> Result<Self> {
        check_bin_width(bin_width)?;
        let d = mins.len();
        let mut feature_indices = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for _ in 0..m {
            let j = rng.random_range(0..d);
            feature_indices.push(j);
            weights.push(rng.random_range(mins[j]..=maxs[j]));
        }
        let bias = rng.random_range(-bin_width..=bin_width);
        Ok(Self {
            feature_indices,
            weights,
            bias,
            bin_width,
        })
    }

    /// Full-dimensional projection with standard-normal weights.
    pub fn sample_gaussian<R: Rng>(rng: &mut R, d: usize, bin_width: f64) -> Result<Self> {
        check_bin_width(bin_width)?;
        let weights = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let bias = rng.random_range(-bin_width..=bin_width);
        Ok(Self {
            feature_indices: (0..d).collect(),
            weights,
            bias,
            bin_width,
        })
    }

    pub fn project(&self, row: &[f64]) -> f64 {
        self.feature_indices
            .iter()
            .zip(&self.weights)
            .map(|(&f, &w)| row[f] * w)
            .sum()
    }

    /// Maps a projected scalar to its bucket.
    pub fn bucket_of(&self, projected: f64) -> Result<i64> {
        let q = ((projected + self.bias) / self.bin_width).floor();
        // i64::MAX is not representable; 2^63 is the first value past the range.
        if q.is_finite() && q >= i64::MIN as f64 && q < 9_223_372_036_854_775_808.0 {
            Ok(q as i64)
        } else {
            Err(Error::BucketOverflow(q))
        }
    }

    pub fn index(&self, row: &[f64]) -> Result<i64> {
        self.bucket_of(self.project(row))
    }
}
