//! Same workloads through the rayon path and the forced sequential path.
//!
//! Results are bit-identical between the two, so only wall time differs.
//! Run with `cargo bench -p hn-hartree`; with `--no-default-features` both
//! groups take the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hn_hartree::hgroup::koranyi_norm;
use hn_hartree::parallel::force_sequential;
use hn_hartree::quadrature::{integrate_hn, riesz_potential};
use hn_hartree::{GroupElement, QuadratureSpec};

fn profile(xi: &GroupElement) -> f64 {
    let q = 2.0 * xi.n() as f64 + 2.0;
    (1.0 + koranyi_norm(xi).powi(4)).powf(-q / 2.0)
}

fn workloads(c: &mut Criterion) {
    let tensor = QuadratureSpec::tensor(32, 24);
    let mc = QuadratureSpec::monte_carlo(7, 200_000);
    let mut xi = vec![0.0; 3];
    xi[0] = 0.4;
    xi[2] = -0.3;
    let xi = GroupElement::from_coords(&xi);

    let mut group = c.benchmark_group("quadrature");
    group.sample_size(10);
    for (mode, sequential) in [("parallel", false), ("sequential", true)] {
        force_sequential(sequential);
        group.bench_function(BenchmarkId::new("integrate_tensor", mode), |b| {
            b.iter(|| integrate_hn(1, profile, 8.0, black_box(&tensor)).unwrap().value)
        });
        group.bench_function(BenchmarkId::new("integrate_monte_carlo", mode), |b| {
            b.iter(|| integrate_hn(1, profile, 8.0, black_box(&mc)).unwrap().value)
        });
        group.bench_function(BenchmarkId::new("riesz_potential_tensor", mode), |b| {
            b.iter(|| riesz_potential(profile, 2.0, black_box(&xi), 8.0, &tensor).unwrap().value)
        });
    }
    force_sequential(false);
    group.finish();
}

criterion_group!(benches, workloads);
criterion_main!(benches);
