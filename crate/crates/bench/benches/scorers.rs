use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use firehash_core::fire::{fit_fire, score_fire};
use firehash_core::fire1::{fit_score_fire1, score_unseen};
use firehash_core::timing::{bench_data, BENCH_DIM};
use firehash_core::{Fire1Params, FireParams, RngSpec};

fn fire(c: &mut Criterion) {
    let mut group = c.benchmark_group("fire_fit_score");
    group.sample_size(10);
    for n in [2_000, 8_000, 32_000] {
        let data = bench_data(n, 7).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| {
                let ens = fit_fire(data, FireParams::default(), RngSpec::new(1)).unwrap();
                black_box(score_fire(data, &ens).unwrap().scores)
            })
        });
    }
    group.finish();
}

fn fire1(c: &mut Criterion) {
    let mut group = c.benchmark_group("fire1_fit_score");
    group.sample_size(10);
    for n in [2_000, 8_000, 32_000] {
        let data = bench_data(n, 7).unwrap();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| black_box(fit_score_fire1(data, Fire1Params::with_dims(BENCH_DIM), RngSpec::new(1)).unwrap().1.scores))
        });
    }
    group.finish();
}

fn fire1_unseen(c: &mut Criterion) {
    let train = bench_data(8_000, 7).unwrap();
    let probe = bench_data(1_000, 8).unwrap();
    let (ens, _) = fit_score_fire1(&train, Fire1Params::with_dims(BENCH_DIM), RngSpec::new(1)).unwrap();
    c.bench_function("fire1_score_unseen_1000", |b| b.iter(|| black_box(score_unseen(&ens, &probe).unwrap())));
}

criterion_group!(benches, fire, fire1, fire1_unseen);
criterion_main!(benches);
