use firehash_core::streams::{gen_abrupt, gen_planted, DriftKind, DriftStreamSpec, OutlierType, PlantedOutlierSpec};
use firehash_core::outlierness::{o_score, OScoreConfig};
use statrs::distribution::{ContinuousCDF, Normal};

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn abrupt_drift_keeps_the_feature_marginal() {
    let standard = Normal::new(0.0, 1.0).unwrap();
    for seed in 0..5 {
        let spec = DriftStreamSpec::abrupt_flip(20_000, seed);
        let samples: Vec<_> = gen_abrupt(&spec).unwrap().collect();
        let (before, after) = samples.split_at(10_000);
        for j in 0..spec.d {
            let a: Vec<f64> = before.iter().map(|s| s.x[j]).collect();
            let b: Vec<f64> = after.iter().map(|s| s.x[j]).collect();
            let ((ma, va), (mb, vb)) = (mean_var(&a), mean_var(&b));
            let z = (ma - mb) / (va / a.len() as f64 + vb / b.len() as f64).sqrt();
            let p = 2.0 * (1.0 - standard.cdf(z.abs()));
            assert!(p > 1e-3, "seed {seed} feature {j}: z={z} p={p}");
        }
        // Labels do change across the flip: same component, other label.
        assert_ne!(spec.component_label(0, 9_999), spec.component_label(0, 10_000));
    }
}

#[test]
fn planted_global_outliers_clear_every_cluster() {
    for seed in 0..10 {
        let spec = PlantedOutlierSpec::two_cluster(seed);
        let planted = gen_planted(&spec).unwrap();
        for (i, t) in planted.outlier_types.iter().enumerate() {
            let row = planted.data.row(i);
            let dist = |c: &[f64]| row.iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            match t {
                Some(OutlierType::Global) => {
                    for c in &spec.clusters {
                        assert!(dist(&c.center) >= spec.global_clearance * c.sigma);
                    }
                }
                Some(OutlierType::Local) => {
                    let parent = &spec.clusters[0];
                    let r = dist(&parent.center) / parent.sigma;
                    assert!((2.0 - 1e-9..=4.0 + 1e-9).contains(&r), "{r}");
                }
                None => {}
            }
        }
    }
}

#[test]
fn planted_o_scores_separate_global_from_local() {
    for seed in 0..5 {
        let planted = gen_planted(&PlantedOutlierSpec::two_cluster(seed)).unwrap();
        let inliers: Vec<&[f64]> = (0..planted.data.rows())
            .filter(|&i| planted.outlier_types[i].is_none())
            .map(|i| planted.data.row(i))
            .collect();
        let scores = |kind| -> Vec<f64> {
            (0..planted.data.rows())
                .filter(|&i| planted.outlier_types[i] == Some(kind))
                .map(|i| o_score(planted.data.row(i), &inliers, OScoreConfig::default()).unwrap())
                .collect()
        };
        let global_min = scores(OutlierType::Global).into_iter().fold(f64::INFINITY, f64::min);
        let local_max = scores(OutlierType::Local).into_iter().fold(0.0, f64::max);
        assert!(global_min > local_max, "seed {seed}: {global_min} <= {local_max}");
    }
}

#[test]
fn stationary_abrupt_spec_never_changes_labels() {
    let spec = DriftStreamSpec::new(DriftKind::Abrupt, 1_000, 2);
    assert!((0..1_000).all(|t| spec.component_label(1, t) == 1));
}
