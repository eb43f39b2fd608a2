//! Sequential vs parallel throughput on the hot paths: candidate ranking,
//! the per-relation weight solve, and one SGD epoch.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use transa::data::{CorruptTarget, NegativeSampler, Strategy};
use transa::eval::link_prediction;
use transa::metric::Variant;
use transa::synth::{product_kg, ProductKgConfig};
use transa::train::{init_model, sgd_epoch, TrainConfig};

fn bench_dataset() -> transa::data::TripleSet {
    let ds = product_kg(&ProductKgConfig {
        n_a: 16,
        n_b: 16,
        relations_a: 2,
        relations_b: 2,
        fact_fraction: 0.08,
        valid_fraction: 0.05,
        test_fraction: 0.05,
        seed: 7,
    });
    ds.to_tripleset().expect("synthetic dataset builds")
}

fn bench_link_prediction(c: &mut Criterion) {
    let ts = bench_dataset();
    let cfg = TrainConfig {
        k: 32,
        variant: Variant::TransA,
        ..TrainConfig::default()
    };
    let model = init_model(&ts, &cfg).expect("init");

    let mut group = c.benchmark_group("link_prediction");
    group.sample_size(10);
    for workers in [1usize, 0] {
        let name = if workers == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(name), &workers, |b, &w| {
            b.iter(|| black_box(link_prediction(&model, &ts, w)));
        });
    }
    group.finish();
}

fn bench_sgd_epoch(c: &mut Criterion) {
    let ts = bench_dataset();
    let cfg = TrainConfig {
        k: 32,
        variant: Variant::TransA,
        batch_size: 256,
        ..TrainConfig::default()
    };
    let sampler = NegativeSampler::new(&ts, Strategy::Bern, CorruptTarget::Either);

    let mut group = c.benchmark_group("sgd_epoch");
    group.sample_size(10);
    for workers in [1usize, 0] {
        let name = if workers == 1 { "sequential" } else { "parallel" };
        group.bench_with_input(BenchmarkId::from_parameter(name), &workers, |b, &w| {
            let mut model = init_model(&ts, &cfg).expect("init");
            b.iter(|| {
                black_box(sgd_epoch(&mut model, &ts, &sampler, &cfg, 1, w).expect("epoch"))
            });
        });
    }
    group.finish();
}

criterion_group!(benches, bench_link_prediction, bench_sgd_epoch);
criterion_main!(benches);
