use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use csflab::curve::is_simple;
use csflab::harness::gen_perturbed_bisector;
use csflab::{flow_step, frechet_distance, hausdorff_distance, stable_dt, ClosedSphericalCurve, PerturbationSpec};

fn bisector(n: usize, seed: u64) -> ClosedSphericalCurve {
    gen_perturbed_bisector(&PerturbationSpec::random(n, 0.2, 2, seed)).expect("bisector")
}

fn bench_frechet(c: &mut Criterion) {
    let mut g = c.benchmark_group("frechet");
    g.sample_size(10);
    for n in [32, 64, 128] {
        let (a, b) = (bisector(n, 1), bisector(n, 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| frechet_distance(black_box(&a), black_box(&b)))
        });
    }
    g.finish();
}

fn bench_hausdorff(c: &mut Criterion) {
    let mut g = c.benchmark_group("hausdorff");
    for n in [64, 256] {
        let (a, b) = (bisector(n, 1), bisector(n, 2));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| {
            bch.iter(|| hausdorff_distance(black_box(&a), black_box(&b)))
        });
    }
    g.finish();
}

fn bench_flow_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow_step");
    for n in [64, 256, 512] {
        let curve = bisector(n, 3);
        let dt = stable_dt(&curve, 0.25);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, &n| {
            bch.iter(|| flow_step(black_box(&curve), dt, n).expect("step"))
        });
    }
    g.finish();
}

fn bench_is_simple(c: &mut Criterion) {
    let mut g = c.benchmark_group("is_simple");
    for n in [256, 1024, 4096] {
        let curve = bisector(n, 4);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| bch.iter(|| is_simple(black_box(&curve))));
    }
    g.finish();
}

criterion_group!(kernels, bench_frechet, bench_hausdorff, bench_flow_step, bench_is_simple);
criterion_main!(kernels);
