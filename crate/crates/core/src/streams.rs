//! Seeded synthetic data: planted-outlier datasets and drifting streams.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, LabelVector};
use crate::error::{Error, Result};
use crate::rng::RngSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSample {
    pub x: Vec<f64>,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutlierType {
    Local,
    Global,
}

/// Isotropic Gaussian clusters plus planted outliers.
///
/// Local outliers sit 2-4 sigma from the center of the densest cluster
/// (largest `size / sigma^d`).
/// Global outliers sit on a ring around the centers' centroid that keeps
/// them at least `global_clearance` sigma from every center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedOutlierSpec {
    pub clusters: Vec<ClusterSpec>,
    pub n_global: usize,
    pub n_local: usize,
    /// Local outlier distance range, in units of the parent cluster's sigma.
    pub local_offset: (f64, f64),
    /// Minimum global outlier distance from each center, in that cluster's sigma.
    pub global_clearance: f64,
    pub rng: RngSpec,
}

impl PlantedOutlierSpec {
    /// Two 2-D clusters (200 and 50 points, equal spread) with 5 local and
    /// 5 global outliers at 20 sigma clearance.
    pub fn two_cluster(seed: u64) -> Self {
        Self {
            clusters: vec![
                ClusterSpec {
                    center: vec![0.4, 0.4],
                    sigma: 0.06,
                    size: 200,
                },
                ClusterSpec {
                    center: vec![1.6, 1.6],
                    sigma: 0.06,
                    size: 50,
                },
            ],
            n_global: 5,
            n_local: 5,
            local_offset: (2.0, 4.0),
            global_clearance: 20.0,
            rng: RngSpec::new(seed),
        }
    }

    /// Scales both cluster sizes so the inliers total roughly `n`.
    pub fn with_inliers(mut self, n: usize) -> Self {
        let total: usize = self.clusters.iter().map(|c| c.size).sum();
        for c in &mut self.clusters {
            c.size = ((c.size as f64 * n as f64 / total as f64).round() as usize).max(1);
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct PlantedData {
    pub data: DataMatrix,
    pub labels: LabelVector,
    /// `Some(kind)` for outlier rows.
    pub outlier_types: Vec<Option<OutlierType>>,
}

impl PlantedData {
    pub fn outlier_flags(&self) -> Vec<bool> {
        self.outlier_types.iter().map(Option::is_some).collect()
    }
}

fn unit_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn gen_planted(spec: &PlantedOutlierSpec) -> Result<PlantedData> {
    let Some(first) = spec.clusters.first() else {
        return Err(Error::param("clusters", "at least one cluster is required"));
    };
    let d = first.center.len();
    if d == 0 {
        return Err(Error::param("clusters", "centers must have at least one coordinate"));
    }
    for c in &spec.clusters {
        if c.size == 0 {
            return Err(Error::param("clusters", "cluster size must be positive"));
        }
        if c.center.len() != d {
            return Err(Error::param("clusters", "all centers must share a dimension"));
        }
        if !(c.sigma > 0.0 && c.sigma.is_finite()) {
            return Err(Error::param("clusters", "sigma must be positive"));
        }
    }
    let (lo, hi) = spec.local_offset;
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::param("local_offset", "need 0 <= low <= high"));
    }

    let mut rng = spec.rng.substream(0);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut types = Vec::new();
    for c in &spec.clusters {
        for _ in 0..c.size {
            rows.push(
                c.center
                    .iter()
                    .map(|&m| m + c.sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            );
            types.push(None);
        }
    }

    let parent = spec
        .clusters
        .iter()
        .map(|c| (c, c.size as f64 / c.sigma.powi(d as i32)))
        .reduce(|best, c| if c.1 > best.1 { c } else { best })
        .expect("non-empty")
        .0;
    for _ in 0..spec.n_local {
        let r = parent.sigma * rng.random_range(lo..=hi);
        let dir = unit_direction(&mut rng, d);
        rows.push(parent.center.iter().zip(&dir).map(|(c, u)| c + r * u).collect());
        types.push(Some(OutlierType::Local));
    }

    let k = spec.clusters.len() as f64;
    let centroid: Vec<f64> = (0..d)
        .map(|j| spec.clusters.iter().map(|c| c.center[j]).sum::<f64>() / k)
        .collect();
    let radius = spec
        .clusters
        .iter()
        .map(|c| {
            let off = c.center.iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            off + spec.global_clearance * c.sigma
        })
        .fold(0.0, f64::max);
    for _ in 0..spec.n_global {
        let r = rng.random_range(radius..=1.5 * radius);
        let dir = unit_direction(&mut rng, d);
        rows.push(centroid.iter().zip(&dir).map(|(c, u)| c + r * u).collect());
        types.push(Some(OutlierType::Global));
    }

    Ok(PlantedData {
        data: DataMatrix::from_rows(&rows)?,
        labels: LabelVector::Outlier(types.iter().map(Option::is_some).collect()),
        outlier_types: types,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftKind {
    /// Class labels of fixed mixture components rotate at each drift point.
    Abrupt,
    /// Rotating hyperplane.
    Incremental,
    /// Class-conditional means translate; the boundary stays put.
    Virtual,
    /// Like `Abrupt`, but alternates between the original and the shifted
    /// labeling so concepts recur.
    Recurring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftStreamSpec {
    pub kind: DriftKind,
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    /// Sorted sample indices where the concept changes (abrupt, recurring).
    pub drift_points: Vec<usize>,
    /// Distance between class means (abrupt, recurring) or between the
    /// class blobs and the boundary (virtual).
    pub separation: f64,
    /// Per-coordinate Gaussian noise.
    pub noise: f64,
    /// Radians per step (incremental) or translation per step (virtual).
    pub rate: f64,
    pub rng: RngSpec,
}

impl DriftStreamSpec {
    pub fn new(kind: DriftKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            d: 2,
            classes: 2,
            drift_points: Vec::new(),
            separation: 1.0,
            noise: 0.25,
            rate: match kind {
                DriftKind::Incremental => 1e-3,
                DriftKind::Virtual => 1e-4,
                _ => 0.0,
            },
            rng: RngSpec::new(seed),
        }
    }

    /// Abrupt stream with a single label flip halfway through.
    pub fn abrupt_flip(n: usize, seed: u64) -> Self {
        Self {
            drift_points: vec![n / 2],
            ..Self::new(DriftKind::Abrupt, n, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if self.d == 0 {
            return Err(Error::param("d", "must be at least 1"));
        }
        if self.classes < 2 {
            return Err(Error::param("classes", "need at least 2"));
        }
        if self.kind == DriftKind::Incremental && (self.d < 2 || self.classes != 2) {
            return Err(Error::param("d", "rotating hyperplane needs d >= 2 and 2 classes"));
        }
        if self.kind == DriftKind::Virtual && self.classes != 2 {
            return Err(Error::param("classes", "virtual drift stream has 2 classes"));
        }
        if self.drift_points.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param("drift_points", "must be sorted"));
        }
        if self.drift_points.iter().any(|&p| p >= self.n) {
            return Err(Error::param("drift_points", "must lie in [0, n)"));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite() && self.separation.is_finite() && self.rate.is_finite()) {
            return Err(Error::param("noise", "noise, separation and rate must be finite, noise >= 0"));
        }
        Ok(())
    }

    /// Mean of mixture component `c` for abrupt/recurring streams.
    pub fn component_mean(&self, c: usize) -> Vec<f64> {
        let half = self.separation / 2.0;
        let mut m = vec![0.0; self.d];
        if self.d == 1 {
            m[0] = if c.is_multiple_of(2) { half } else { -half } * (1 + c / 2) as f64;
        } else {
            let a = TAU * c as f64 / self.classes as f64;
            m[0] = half * a.cos();
            m[1] = half * a.sin();
        }
        m
    }

    /// Label carried by component `c` at time `t` (abrupt/recurring).
    pub fn component_label(&self, c: usize, t: usize) -> usize {
        let passed = self.drift_points.partition_point(|&p| p <= t);
        let shift = match self.kind {
            DriftKind::Recurring => passed % 2,
            _ => passed,
        };
        (c + shift) % self.classes
    }

    /// Unit normal of the rotating hyperplane at time `t`.
    pub fn hyperplane(&self, t: usize) -> Vec<f64> {
        let theta = self.rate * t as f64;
        let mut w = vec![0.0; self.d];
        w[0] = theta.cos();
        w[1] = theta.sin();
        w
    }
}

/// Sequential generator; one sample per `next()` call.
#[derive(Debug, Clone)]
pub struct DriftStream {
    spec: DriftStreamSpec,
    rng: ChaCha8Rng,
    t: usize,
}

impl DriftStream {
    pub fn spec(&self) -> &DriftStreamSpec {
        &self.spec
    }

    fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn mixture_sample(&mut self) -> StreamSample {
        let c = self.rng.random_range(0..self.spec.classes);
        let mean = self.spec.component_mean(c);
        let noise = self.spec.noise;
        let x = mean.iter().map(|m| m + noise * self.gaussian()).collect();
        StreamSample {
            x,
            y: self.spec.component_label(c, self.t),
        }
    }

    fn hyperplane_sample(&mut self) -> StreamSample {
        let x: Vec<f64> = (0..self.spec.d).map(|_| self.rng.random_range(-1.0..=1.0)).collect();
        let w = self.spec.hyperplane(self.t);
        let dot: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum();
        StreamSample {
            x,
            y: usize::from(dot >= 0.0),
        }
    }

    fn virtual_sample(&mut self) -> StreamSample {
        let y = self.rng.random_range(0..2usize);
        let side = if y == 1 { 1.0 } else { -1.0 };
        let shift = self.spec.rate * self.t as f64;
        let noise = self.spec.noise;
        let mut x = Vec::with_capacity(self.spec.d);
        let mut off = self.spec.separation / 2.0 + noise * self.gaussian().abs();
        if self.spec.d == 1 {
            off += shift.abs();
        }
        x.push(side * off);
        for _ in 1..self.spec.d {
            x.push(shift + noise * self.gaussian());
        }
        StreamSample { x, y }
    }
}

impl Iterator for DriftStream {
    type Item = StreamSample;

    fn next(&mut self) -> Option<StreamSample> {
        if self.t >= self.spec.n {
            return None;
        }
        let s = match self.spec.kind {
            DriftKind::Abrupt | DriftKind::Recurring => self.mixture_sample(),
            DriftKind::Incremental => self.hyperplane_sample(),
            DriftKind::Virtual => self.virtual_sample(),
        };
        self.t += 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.spec.n - self.t;
        (left, Some(left))
    }
}

pub fn gen_stream(spec: &DriftStreamSpec) -> Result<DriftStream> {
    spec.validate()?;
    Ok(DriftStream {
        spec: spec.clone(),
        rng: spec.rng.substream(0),
        t: 0,
    })
}

fn gen_kind(spec: &DriftStreamSpec, kind: DriftKind) -> Result<DriftStream> {
    if spec.kind != kind {
        return Err(Error::param("kind", format!("expected {kind:?}, got {:?}", spec.kind)));
    }
    gen_stream(spec)
}

pub fn gen_abrupt(spec: &DriftStreamSpec) -> Result<DriftStream> {
    gen_kind(spec, DriftKind::Abrupt)
}

pub fn gen_incremental(spec: &DriftStreamSpec) -> Result<DriftStream> {
    gen_kind(spec, DriftKind::Incremental)
}

pub fn gen_virtual(spec: &DriftStreamSpec) -> Result<DriftStream> {
    gen_kind(spec, DriftKind::Virtual)
}

pub fn gen_recurring(spec: &DriftStreamSpec) -> Result<DriftStream> {
    gen_kind(spec, DriftKind::Recurring)
}

/// Collects a stream into a matrix and label strings.
pub fn collect_stream(stream: DriftStream) -> Result<(DataMatrix, Vec<usize>)> {
    let samples: Vec<StreamSample> = stream.collect();
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.x.as_slice()).collect();
    Ok((DataMatrix::from_rows(&rows)?, samples.iter().map(|s| s.y).collect()))
}
