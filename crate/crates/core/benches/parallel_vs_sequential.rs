use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dehn_core::balls::sphere_table;
use dehn_core::distortion::witness_samples;
use dehn_core::exec::Mode;
use dehn_core::presentations::LevelTag;
use dehn_core::Config;

fn sphere_tables(c: &mut Criterion) {
    let cfg = Config::default();
    let rs: Vec<u64> = (1..=16).collect();
    let mut group = c.benchmark_group("sphere_table_H2");
    for (name, mode) in [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| sphere_table(LevelTag::h(2), black_box(&rs), &cfg, mode).expect("table builds"))
        });
    }
    group.finish();
}

fn distortion_samples(c: &mut Criterion) {
    let cfg = Config::default();
    let ns: Vec<u64> = (1..=10).collect();
    let mut group = c.benchmark_group("witness_samples_n1");
    group.sample_size(10);
    for (name, mode) in [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| witness_samples(1, black_box(&ns), &cfg, mode).expect("samples build"))
        });
    }
    group.finish();
}

criterion_group!(benches, sphere_tables, distortion_samples);
criterion_main!(benches);
