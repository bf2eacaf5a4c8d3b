use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use segclust_bench::{bench_penalty, bench_signal};
use segclust_core::segdp::first_pass;
use segclust_core::select;

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("select");
    group.sample_size(10);
    for n in [250, 500, 1000, 2000] {
        let y = bench_signal(n, 1).unwrap();
        let spec = bench_penalty(n, 10).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| select(&y, &spec).unwrap())
        });
    }
    group.finish();
}

fn segmentation_pass(c: &mut Criterion) {
    let mut group = c.benchmark_group("first_pass");
    group.sample_size(10);
    for n in [500, 1000] {
        let y = bench_signal(n, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| first_pass(&y, 11).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, selection, segmentation_pass);
criterion_main!(benches);
