use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpos_core::fitzpatrick::phi_build;
use qpos_core::maximality::{premax_certify_with, PremaxTarget};
use qpos_core::numerics::grid::{grid_scan_max, BoxGrid};
use qpos_core::{Exec, PointSet, SsdSpace, Vector};

fn modes() -> Vec<(&'static str, Exec)> {
    vec![
        ("sequential", Exec::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Exec::Parallel),
    ]
}

fn diagonal(n: i32, pitch: f64) -> PointSet {
    let sp = Arc::new(SsdSpace::monotone(1).unwrap());
    let pts = (-n..=n).map(|i| Vector::from_column_slice(&[i as f64 * pitch, i as f64 * pitch])).collect();
    PointSet::new(sp, pts).unwrap()
}

fn phi_gap_scan(c: &mut Criterion) {
    let a = diagonal(40, 0.05);
    let phi = phi_build(&a);
    let g = BoxGrid::cube(2, 2.0, 0.01, 1).unwrap();
    let mut group = c.benchmark_group("phi_gap_scan");
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                grid_scan_max(|y: &Vector| a.space().q_value(y).unwrap() - phi.eval(y).unwrap(), &g, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn premax(c: &mut Criterion) {
    let a = diagonal(12, 0.25);
    let g = BoxGrid::cube(2, 3.0, 0.05, 3).unwrap();
    let mut group = c.benchmark_group("premax_certify");
    group.sample_size(20);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| premax_certify_with(PremaxTarget::Points(&a), &g, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, phi_gap_scan, premax);
criterion_main!(benches);
