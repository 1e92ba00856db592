//! Benchmarks for the combinatorial reduction pipeline: counting the full
//! cartesian space, generating pairwise covering sets, and verifying coverage.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use snowleopard_bench::{small_mixed, ten_by_twenty_six};
use snowleopard_core::{count_all, gen_all, gen_tway, verify_coverage};

fn bench_count_all(c: &mut Criterion) {
    let spec = ten_by_twenty_six();
    c.bench_function("count_all 10x26", |b| {
        b.iter(|| count_all(std::hint::black_box(&spec)))
    });
}

fn bench_gen_tway(c: &mut Criterion) {
    let big = ten_by_twenty_six();
    let small = small_mixed();
    let mut group = c.benchmark_group("gen_tway");
    group.sample_size(20);
    group.bench_function("pairwise 10x26", |b| {
        b.iter(|| gen_tway(std::hint::black_box(&big), 2, 0).unwrap())
    });
    group.bench_function("pairwise 3x2x3x2", |b| {
        b.iter(|| gen_tway(std::hint::black_box(&small), 2, 0).unwrap())
    });
    group.bench_function("three-way 3x2x3x2", |b| {
        b.iter(|| gen_tway(std::hint::black_box(&small), 3, 0).unwrap())
    });
    group.finish();
}

fn bench_gen_all(c: &mut Criterion) {
    let small = small_mixed();
    c.bench_function("gen_all 3x2x3x2", |b| {
        b.iter(|| gen_all(std::hint::black_box(&small), None).unwrap())
    });
}

fn bench_verify_coverage(c: &mut Criterion) {
    let big = ten_by_twenty_six();
    let set = gen_tway(&big, 2, 0).unwrap();
    c.bench_function("verify_coverage pairwise 10x26", |b| {
        b.iter_batched(
            || set.clone(),
            |set| verify_coverage(std::hint::black_box(&set), 2).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_count_all,
    bench_gen_tway,
    bench_gen_all,
    bench_verify_coverage
);
criterion_main!(benches);
