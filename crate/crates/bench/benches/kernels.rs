use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kzstring::oracle::solve_nonlinear;
use kzstring::{dalembert_state, sigma_grid};
use kzstring_bench::{ellipse, ellipse_map};

fn transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("transform");
    for nodes in [256usize, 1024] {
        group.bench_with_input(BenchmarkId::new("build", nodes), &nodes, |b, &n| {
            b.iter(|| ellipse_map(black_box(n)))
        });
    }
    let map = ellipse_map(1024);
    group.bench_function("theta", |b| {
        b.iter(|| map.theta(black_box(0.3), black_box(1.0)))
    });
    group.bench_function("phi", |b| {
        b.iter(|| map.phi(black_box(0.3), black_box(1.0)))
    });
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let map = ellipse_map(1024);
    let mut group = c.benchmark_group("dalembert_state");
    for nodes in [256usize, 1024] {
        let grid = sigma_grid(&map, nodes, 0.0).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &grid, |b, g| {
            b.iter(|| dalembert_state(&map, black_box(0.5), g))
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let curve = ellipse();
    let mut group = c.benchmark_group("solve_nonlinear");
    group.sample_size(10);
    for nodes in [128usize, 512] {
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |b, &n| {
            b.iter(|| solve_nonlinear(&curve, n, black_box(&[0.5])))
        });
    }
    group.finish();
}

criterion_group!(benches, transform, evolution, oracle);
criterion_main!(benches);
