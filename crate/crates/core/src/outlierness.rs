//! o-score: how local or global an outlier is relative to the inliers, and
//! the 20-bin histogram of o-scores used as a per-dataset feature vector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::numeric::euclidean;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OScoreConfig {
    /// Number of nearest (farthest) inlier distances averaged.
    pub phi: usize,
}

impl Default for OScoreConfig {
    fn default() -> Self {
        Self { phi: 10 }
    }
}

/// Averaging window actually used for `inliers` points: `phi` clamped to
/// `[1, inliers / 2]` so the near and far windows never overlap.
pub fn effective_phi(phi: usize, inliers: usize) -> usize {
    phi.min(inliers / 2).max(1)
}

/// Mean of the `phi_eff` smallest inlier distances over the mean of the
/// `phi_eff` largest. Lies in `[0, 1]`; near 1 for global outliers.
pub fn o_score<R: AsRef<[f64]>>(point: &[f64], inliers: &[R], config: OScoreConfig) -> Result<f64> {
    if config.phi == 0 {
        return Err(Error::param("phi", "must be at least 1"));
    }
    if inliers.is_empty() {
        return Err(Error::Empty("o-score needs at least one inlier".into()));
    }
    let mut dist: Vec<f64> = inliers.iter().map(|i| euclidean(point, i.as_ref())).collect();
    dist.sort_by(f64::total_cmp);
    let k = effective_phi(config.phi, dist.len());
    let near: f64 = dist[..k].iter().sum::<f64>() / k as f64;
    let far: f64 = dist[dist.len() - k..].iter().sum::<f64>() / k as f64;
    if far == 0.0 {
        return Err(Error::Undefined(
            "o-score undefined: point coincides with every inlier".into(),
        ));
    }
    Ok(near / far)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OScoreHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// o-score per outlier, in row order.
    pub scores: Vec<f64>,
    /// Row index of each entry in `scores`.
    pub outlier_rows: Vec<usize>,
}

/// Equal-width 20-bin histogram over `[min, max]` of the outliers'
/// o-scores (last bin closed). When every o-score is equal the span is
/// widened upward by a few ulps so all mass lands in bin 0.
pub fn histogram(values: &[f64]) -> (Vec<f64>, Vec<u64>) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edges: Vec<f64> = if hi > lo {
        let width = hi - lo;
        let mut e: Vec<f64> = (0..=HISTOGRAM_BINS)
            .map(|i| lo + width * i as f64 / HISTOGRAM_BINS as f64)
            .collect();
        e[HISTOGRAM_BINS] = hi;
        e
    } else {
        let step = 4.0 * f64::EPSILON * lo.abs().max(1.0);
        (0..=HISTOGRAM_BINS).map(|i| lo + step * i as f64).collect()
    };
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    for &v in values {
        // First bin whose upper edge exceeds v; the top edge is inclusive.
        let bin = edges[1..HISTOGRAM_BINS]
            .partition_point(|&e| e <= v)
            .min(HISTOGRAM_BINS - 1);
        counts[bin] += 1;
    }
    (edges, counts)
}

pub fn oscore_histogram(data: &DataMatrix, outliers: &[bool], config: OScoreConfig) -> Result<OScoreHistogram> {
    if outliers.len() != data.rows() {
        return Err(Error::LengthMismatch {
            left: outliers.len(),
            right: data.rows(),
        });
    }
    let inliers: Vec<&[f64]> = (0..data.rows()).filter(|&i| !outliers[i]).map(|i| data.row(i)).collect();
    let outlier_rows: Vec<usize> = (0..data.rows()).filter(|&i| outliers[i]).collect();
    if outlier_rows.is_empty() {
        return Err(Error::Empty("no outliers labelled".into()));
    }
    if inliers.is_empty() {
        return Err(Error::Empty("no inliers labelled".into()));
    }
    let scores = outlier_rows
        .par_iter()
        .map(|&i| o_score(data.row(i), &inliers, config))
        .collect::<Result<Vec<_>>>()?;
    let (bin_edges, counts) = histogram(&scores);
    Ok(OScoreHistogram {
        bin_edges,
        counts,
        scores,
        outlier_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equidistant_is_one() {
        let inliers = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        assert_eq!(o_score(&[0.0, 0.0], &inliers, OScoreConfig::default()).unwrap(), 1.0);
    }

    #[test]
    fn averaged_windows() {
        let inliers: Vec<[f64; 1]> = (1..=20).map(|v| [v as f64]).collect();
        let s = o_score(&[0.0], &inliers, OScoreConfig { phi: 10 }).unwrap();
        assert!((s - 5.5 / 15.5).abs() < 1e-15);
        assert!((s - 0.35484).abs() < 1e-5);
    }

    #[test]
    fn small_inlier_sets_clamp_phi() {
        assert_eq!(effective_phi(10, 3), 1);
        assert_eq!(effective_phi(10, 1), 1);
        assert_eq!(effective_phi(10, 25), 10);
        let inliers = [[1.0], [2.0], [4.0]];
        assert_eq!(o_score(&[0.0], &inliers, OScoreConfig::default()).unwrap(), 0.25);
    }

    #[test]
    fn errors() {
        let none: [[f64; 1]; 0] = [];
        assert!(o_score(&[0.0], &none, OScoreConfig::default()).is_err());
        assert!(o_score(&[1.0], &[[1.0], [1.0]], OScoreConfig::default()).is_err());
        assert!(o_score(&[0.0], &[[1.0]], OScoreConfig { phi: 0 }).is_err());

        let data = DataMatrix::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(oscore_histogram(&data, &[false, false], OScoreConfig::default()).is_err());
        assert!(oscore_histogram(&data, &[true, true], OScoreConfig::default()).is_err());
    }

    #[test]
    fn single_outlier_histogram() {
        let data = DataMatrix::from_rows(&[[0.0], [1.0], [2.0], [10.0]]).unwrap();
        let h = oscore_histogram(&data, &[false, false, false, true], OScoreConfig::default()).unwrap();
        assert_eq!(h.bin_edges.len(), 21);
        assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        let mut expected = vec![0; 20];
        expected[0] = 1;
        assert_eq!(h.counts, expected);
    }

    #[test]
    fn histogram_endpoints() {
        let (edges, counts) = histogram(&[0.1, 0.9]);
        assert_eq!(edges[0], 0.1);
        assert_eq!(edges[20], 0.9);
        assert_eq!(counts[0], 1);
        assert_eq!(counts[19], 1);
        assert_eq!(counts.iter().sum::<u64>(), 2);
    }

    #[test]
    fn radial_motion_is_monotone_in_1d() {
        let inliers: Vec<[f64; 1]> = (0..30).map(|v| [v as f64 * 0.1]).collect();
        let mut prev = 0.0;
        for step in 1..50 {
            let x = 3.0 + step as f64 * 0.5;
            let s = o_score(&[x], &inliers, OScoreConfig::default()).unwrap();
            assert!(s > prev && s <= 1.0);
            prev = s;
        }
    }

    proptest! {
        #[test]
        fn invariant_under_similarity_transforms(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..30),
            o in (-20.0f64..20.0, -20.0f64..20.0),
            angle in 0.0f64..std::f64::consts::TAU,
            shift in (-100.0f64..100.0, -100.0f64..100.0),
            scale in 0.01f64..100.0,
        ) {
            let (c, s) = (angle.cos(), angle.sin());
            let tf = |p: (f64, f64)| [scale * (c * p.0 - s * p.1) + shift.0, scale * (s * p.0 + c * p.1) + shift.1];
            let inliers: Vec<[f64; 2]> = pts.iter().map(|&p| [p.0, p.1]).collect();
            let moved: Vec<[f64; 2]> = pts.iter().map(|&p| tf(p)).collect();
            let cfg = OScoreConfig { phi: 3 };
            if let Ok(a) = o_score(&[o.0, o.1], &inliers, cfg) {
                let b = o_score(&tf(o), &moved, cfg).unwrap();
                prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
                prop_assert!((0.0..=1.0).contains(&a));
            }
        }

        #[test]
        fn histogram_counts_every_value(v in prop::collection::vec(0.0f64..1.0, 1..60)) {
            let (edges, counts) = histogram(&v);
            prop_assert_eq!(counts.iter().sum::<u64>(), v.len() as u64);
            prop_assert_eq!(edges.len(), 21);
            prop_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
