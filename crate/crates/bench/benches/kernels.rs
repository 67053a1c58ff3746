use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpoint_core::electrostatics::{build_geometry, solve_poisson, BoundarySpec, Extents, PoissonProblem, SolverOptions, Variant};
use lpoint_core::injection::{monte_carlo, ProtocolSpec};
use lpoint_core::lattice::{l_gamma_x_path, KVector};
use lpoint_core::linalg::eigh;
use lpoint_core::tightbinding::{build_hamiltonian, solve_bands, TbParams};

fn eigensolver(c: &mut Criterion) {
    let h = build_hamiltonian(&TbParams::silicon(), KVector::new(0.13, 0.29, 0.41));
    c.bench_function("eigh 20x20", |b| b.iter(|| eigh(black_box(&h)).unwrap()));
}

fn bands(c: &mut Criterion) {
    let params = TbParams::silicon();
    let path = l_gamma_x_path(50).unwrap();
    c.bench_function("solve_bands L-Γ-X, 50 per segment", |b| b.iter(|| solve_bands(black_box(&params), &path).unwrap()));
}

fn sor(c: &mut Criterion) {
    let mut g = c.benchmark_group("red-black SOR");
    g.sample_size(10);
    for n in [65usize, 129, 257] {
        g.bench_with_input(BenchmarkId::new("plates", n), &n, |b, &n| {
            b.iter(|| {
                let mut p = PoissonProblem::new(n, n, 1.0);
                for iy in 0..n {
                    p.set_dirichlet(0, iy, 0.0);
                    p.set_dirichlet(n - 1, iy, 1.0);
                }
                for iz in 1..n - 1 {
                    p.set_dirichlet(iz, 0, 0.5);
                }
                p.solve(&SolverOptions { tol: 1e-10, ..Default::default() }).unwrap()
            })
        });
    }
    let geom = build_geometry(Variant::Protruding, 2.5, 0.5, &Extents::default()).unwrap();
    g.bench_function("protruding fin", |b| {
        b.iter(|| solve_poisson(&geom, &BoundarySpec::default(), None, 1e-10, 500_000).unwrap())
    });
    g.finish();
}

fn injection(c: &mut Criterion) {
    let spec = ProtocolSpec::default();
    c.bench_function("monte carlo 10k trials", |b| b.iter(|| monte_carlo(&spec, 0.5, black_box(2024), 10_000, 20).unwrap()));
}

criterion_group!(benches, eigensolver, bands, sor, injection);
criterion_main!(benches);
