//! Public-API results checked against brute-force reference computations.

use std::collections::HashMap;

use firehash_core::fire::{fit_fire, score_fire};
use firehash_core::fire1::{fit_score_fire1, score_unseen};
use firehash_core::metrics::MethodMeasureTable;
use firehash_core::outlierness::{o_score, OScoreConfig};
use firehash_core::{DataMatrix, Fire1Params, FireParams, RankedScores, RngSpec};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    let values = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
    DataMatrix::new(n, d, values).unwrap()
}

/// Rows drawn from a small lattice so hash collisions are common.
fn lattice_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DataMatrix {
    let values = (0..n * d).map(|_| rng.random_range(0..4) as f64 * 0.5).collect();
    DataMatrix::new(n, d, values).unwrap()
}

#[test]
fn sketch_index_matches_bigint_sum_then_mod() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = random_matrix(&mut rng, 200, 30);
    for modulus in [1_017_881u64, 2, 3, 65_537, 4_294_967_291] {
        let params = FireParams {
            estimators: 20,
            sampled_dims: 40,
            modulus,
        };
        let ens = fit_fire(&data, params, RngSpec::new(modulus)).unwrap();
        for row in data.iter_rows() {
            for est in &ens.estimators {
                let mut total = BigUint::from(0u32);
                for (j, &f) in est.feature_indices.iter().enumerate() {
                    if row[f] >= est.thresholds[j] {
                        total += BigUint::from(est.int_weights[j]);
                    }
                }
                let expected = total % BigUint::from(modulus);
                assert_eq!(BigUint::from(est.index(row)), expected);
            }
        }
    }
}

#[test]
fn projection_index_matches_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data = random_matrix(&mut rng, 200, 6);
    for bw in [10.0, 1.0, 0.1, 1e-3, 1e-6] {
        let params = Fire1Params {
            estimators: 25,
            sampled_dims: 9,
            bin_width: bw,
        };
        let (ens, _) = fit_score_fire1(&data, params, RngSpec::new(3)).unwrap();
        for row in data.iter_rows() {
            for est in &ens.estimators {
                let mut dot = 0.0;
                for (&f, &w) in est.feature_indices.iter().zip(&est.weights) {
                    dot += row[f] * w;
                }
                let expected = ((dot + est.bias) / est.bin_width).floor() as i64;
                assert_eq!(est.index(row).unwrap(), expected);
            }
        }
    }
}

/// Neighborhood of row i under estimator l = |{j : h_l(j) = h_l(i)}| / N.
fn pairwise_scores<K: PartialEq>(indices: &[Vec<K>]) -> Vec<f64> {
    let n = indices.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (l, key) in indices[i].iter().enumerate() {
                let same = indices.iter().filter(|other| other[l] == *key).count();
                s += -2.0 * (same as f64 / n as f64).ln();
            }
            s
        })
        .collect()
}

fn assert_rel_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (i, (&g, &w)) in got.iter().zip(want).enumerate() {
        let scale = w.abs().max(1.0);
        assert!((g - w).abs() <= tol * scale, "row {i}: {g} vs {w}");
    }
}

#[test]
fn fire_scores_match_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, d, m) in [(500, 5, 3), (300, 12, 8), (120, 2, 2), (1, 3, 3)] {
        let data = lattice_matrix(&mut rng, n, d);
        let params = FireParams {
            estimators: 40,
            sampled_dims: m,
            ..FireParams::default()
        };
        let ens = fit_fire(&data, params, RngSpec::new(n as u64)).unwrap();
        let report = score_fire(&data, &ens).unwrap();
        let indices: Vec<Vec<u64>> = data.iter_rows().map(|r| ens.indices(r)).collect();
        assert_rel_close(&report.scores, &pairwise_scores(&indices), 1e-9);
    }
}

#[test]
fn fire1_scores_match_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, d, bw) in [(500, 3, 0.5), (250, 8, 0.1), (50, 1, 2.0)] {
        let data = lattice_matrix(&mut rng, n, d);
        let params = Fire1Params {
            estimators: 30,
            sampled_dims: d,
            bin_width: bw,
        };
        let (ens, report) = fit_score_fire1(&data, params, RngSpec::new(7)).unwrap();
        let indices: Vec<Vec<i64>> = data.iter_rows().map(|r| ens.indices(r).unwrap()).collect();
        assert_rel_close(&report.scores, &pairwise_scores(&indices), 1e-9);
    }
}

#[test]
fn unseen_scores_match_smoothed_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let train = lattice_matrix(&mut rng, 200, 3);
    let probe = lattice_matrix(&mut rng, 40, 3);
    let (ens, _) = fit_score_fire1(&train, Fire1Params::with_dims(3), RngSpec::new(8)).unwrap();
    let train_idx: Vec<Vec<i64>> = train.iter_rows().map(|r| ens.indices(r).unwrap()).collect();
    let want: Vec<f64> = probe
        .iter_rows()
        .map(|r| {
            let idx = ens.indices(r).unwrap();
            (0..idx.len())
                .map(|l| {
                    let k = train_idx.iter().filter(|t| t[l] == idx[l]).count();
                    -2.0 * ((1 + k) as f64 / 201.0).ln()
                })
                .sum()
        })
        .collect();
    assert_rel_close(&score_unseen(&ens, &probe).unwrap(), &want, 1e-9);
}

#[test]
fn o_score_matches_sorted_distance_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let n = rng.random_range(1..40);
        let inliers: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
            .collect();
        let point = [rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)];
        let phi = rng.random_range(1..15);
        let mut dists: Vec<f64> = inliers
            .iter()
            .map(|q| ((q[0] - point[0]).powi(2) + (q[1] - point[1]).powi(2)).sqrt())
            .collect();
        dists.sort_by(f64::total_cmp);
        let k = phi.min(n / 2).max(1);
        let near: f64 = dists[..k].iter().sum::<f64>() / k as f64;
        let far: f64 = dists[n - k..].iter().sum::<f64>() / k as f64;
        let got = o_score(&point, &inliers, OScoreConfig { phi }).unwrap();
        assert!((got - near / far).abs() <= 1e-12 * (near / far).max(1.0), "{got} vs {}", near / far);
    }
}

/// Instance of at most 15 points with heavy score ties and at least one
/// inlier and one outlier.
fn tied_instance(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..=15);
    let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..4) as f64).collect();
    let mut flags: Vec<bool> = (0..n).map(|_| rng.random_bool(0.4)).collect();
    flags[0] = true;
    flags[1] = false;
    (scores, flags)
}

#[test]
fn roc_auc_equals_pairwise_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..1000 {
        let (scores, flags) = tied_instance(&mut rng);
        let mut doubled = 0u64;
        let mut pairs = 0u64;
        for (i, &oi) in flags.iter().enumerate() {
            for (j, &oj) in flags.iter().enumerate() {
                if oi && !oj {
                    pairs += 1;
                    doubled += match scores[i].total_cmp(&scores[j]) {
                        std::cmp::Ordering::Greater => 2,
                        std::cmp::Ordering::Equal => 1,
                        std::cmp::Ordering::Less => 0,
                    };
                }
            }
        }
        let want = doubled as f64 / (2 * pairs) as f64;
        let got = RankedScores::new(scores, flags).unwrap().roc_auc().unwrap();
        assert_eq!(got, want);
    }
}

/// AP as an exact fraction, from ranks found by pairwise comparison
/// (descending score, lower index first on ties).
fn exact_ap(scores: &[f64], flags: &[bool]) -> (u128, u128) {
    let n = scores.len();
    let rank = |i: usize| {
        1 + (0..n)
            .filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i))
            .count()
    };
    let outliers: Vec<usize> = (0..n).filter(|&i| flags[i]).collect();
    // Sum of (outliers ranked at or above o) / rank(o) over a common denominator.
    let lcm: u128 = (1..=n as u128).fold(1, |acc, k| acc / gcd(acc, k) * k);
    let mut num = 0u128;
    for &o in &outliers {
        let r = rank(o);
        let hits = outliers.iter().filter(|&&p| rank(p) <= r).count() as u128;
        num += hits * (lcm / r as u128);
    }
    (num, lcm * outliers.len() as u128)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn average_precision_equals_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (scores, flags) = tied_instance(&mut rng);
        let (num, den) = exact_ap(&scores, &flags);
        // Both fit in 53 bits, so one IEEE division is the correctly rounded value.
        let want = num as f64 / den as f64;
        let got = RankedScores::new(scores, flags).unwrap().average_precision().unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn friedman_dataset_ranks_sum_to_triangular_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let methods = rng.random_range(1..8);
        let datasets = rng.random_range(1..6);
        let values: Vec<Vec<Option<f64>>> = (0..methods)
            .map(|_| {
                (0..datasets)
                    .map(|_| rng.random_bool(0.85).then(|| rng.random_range(0..3) as f64 / 2.0))
                    .collect()
            })
            .collect();
        let mut values = values;
        for v in values[0].iter_mut() {
            v.get_or_insert(1.0);
        }
        let table = MethodMeasureTable {
            methods: (0..methods).map(|m| format!("m{m}")).collect(),
            datasets: (0..datasets).map(|d| format!("d{d}")).collect(),
            values: values.clone(),
            higher_is_better: rng.random_bool(0.5),
        };
        let ranks = table.dataset_ranks().unwrap();
        for d in 0..datasets {
            let phi = values.iter().filter(|row| row[d].is_some()).count() as f64;
            let sum: f64 = ranks.iter().filter_map(|r| r[d]).sum();
            assert_eq!(sum, phi * (phi + 1.0) / 2.0);
        }
        let friedman = table.friedman_ranks().unwrap();
        for m in 0..methods {
            let own: Vec<f64> = ranks[m].iter().flatten().copied().collect();
            match friedman[m] {
                Some(f) => assert!((f - own.iter().sum::<f64>() / own.len() as f64).abs() < 1e-12),
                None => assert!(own.is_empty()),
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fire_scores_are_bucket_functions(seed in any::<u64>(), n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = lattice_matrix(&mut rng, n, 3);
        let ens = fit_fire(&data, FireParams { estimators: 10, sampled_dims: 4, ..FireParams::default() }, RngSpec::new(seed)).unwrap();
        let report = score_fire(&data, &ens).unwrap();
        let mut by_signature: HashMap<Vec<u64>, f64> = HashMap::new();
        for (i, row) in data.iter_rows().enumerate() {
            let sig = ens.indices(row);
            let s = *by_signature.entry(sig).or_insert(report.scores[i]);
            prop_assert_eq!(s, report.scores[i]);
            prop_assert!(report.scores[i] >= 0.0);
        }
    }
}
