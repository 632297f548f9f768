use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use glvortex::asymptotics::{defect_for, Branch};
use glvortex::batch::{map_parallel, map_sequential};
use glvortex::solver::continuation_solve;
use glvortex::{build_grid, CouplingParams, DegreePair, GridSpec, RadialGrid, SolveOptions};

fn sweep_point(grid: &RadialGrid, b: f64) -> f64 {
    let params = CouplingParams::new(1.0, 1.0, b, 1.0, 1.0);
    let p = continuation_solve(
        params,
        DegreePair::new(1, 1),
        grid,
        &SolveOptions::default(),
    )
    .unwrap();
    p.report.residual
}

fn coupling_sweep(c: &mut Criterion) {
    let grid = build_grid(GridSpec::uniform(80.0, 2000)).unwrap();
    let couplings: Vec<f64> = (-8..=8).map(|k| 0.1 * f64::from(k)).collect();
    let mut group = c.benchmark_group("coupling_sweep");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", couplings.len()), |b| {
        b.iter(|| map_sequential(black_box(&couplings), |&v| sweep_point(&grid, v)))
    });
    group.bench_function(BenchmarkId::new("parallel", couplings.len()), |b| {
        b.iter(|| map_parallel(black_box(&couplings), |&v| sweep_point(&grid, v)))
    });
    group.finish();
}

fn exact_defects(c: &mut Criterion) {
    let pairs: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0]
        .iter()
        .flat_map(|&r| (1..=8).map(move |k| (r, 0.5f64.powi(k))))
        .collect();
    let params = CouplingParams::new(2.0, 1.0, 0.8, 1.0, 0.7);
    let run = |&(r, delta): &(f64, f64)| {
        defect_for(
            &params,
            DegreePair::new(1, 1),
            Branch::UpperPlusLowerMinus,
            delta,
            r,
        )
        .unwrap()
    };
    let mut group = c.benchmark_group("exact_defects");
    group.bench_function(BenchmarkId::new("sequential", pairs.len()), |b| {
        b.iter(|| map_sequential(black_box(&pairs), run))
    });
    group.bench_function(BenchmarkId::new("parallel", pairs.len()), |b| {
        b.iter(|| map_parallel(black_box(&pairs), run))
    });
    group.finish();
}

criterion_group!(benches, coupling_sweep, exact_defects);
criterion_main!(benches);
