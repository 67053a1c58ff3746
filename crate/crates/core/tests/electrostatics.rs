use std::f64::consts::PI;

use lpoint_core::electrostatics::*;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn fin(variant: Variant, w_cells: usize, v: f64) -> (Geometry, FieldGrid) {
    let g = build_geometry(variant, w_cells as f64 * 0.5, 0.5, &Extents::default()).unwrap();
    let bc = BoundarySpec { gate_voltage: v, ..Default::default() };
    let f = solve_poisson(&g, &bc, None, TOL, 500_000).unwrap();
    (g, f)
}

/// Oracle: separable solution of the Laplace problem on the unit square.
fn sine_error(n: usize) -> f64 {
    let h = 1.0 / (n - 1) as f64;
    let mut p = PoissonProblem::new(n, n, h);
    for k in 0..n {
        p.set_dirichlet(0, k, 0.0);
        p.set_dirichlet(k, 0, 0.0);
        p.set_dirichlet(k, n - 1, 0.0);
        p.set_dirichlet(n - 1, k, (PI * k as f64 * h).sin());
    }
    let f = p.solve(&SolverOptions { tol: 1e-13, max_iter: 1_000_000, ..Default::default() }).unwrap();
    let mut e: f64 = 0.0;
    for iz in 0..n {
        for iy in 0..n {
            let exact = (PI * iy as f64 * h).sin() * (PI * iz as f64 * h).sinh() / PI.sinh();
            e = e.max((f.at(iz, iy) - exact).abs());
        }
    }
    e
}

#[test]
fn sine_benchmark_is_second_order() {
    let errs: Vec<f64> = [33, 65, 129, 257].iter().map(|&n| sine_error(n)).collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.3, "{errs:?}");
    }
    // the library helper agrees with the independent oracle
    assert!((sine_benchmark_error(33, 1e-13).unwrap() - errs[0]).abs() < 1e-12);
}

#[test]
fn protruding_gradient_is_flatter() {
    for w in [3, 5, 8] {
        for v in [0.5, 1.0] {
            let (gp, fp) = fin(Variant::Planarized, w, v);
            let (gq, fq) = fin(Variant::Protruding, w, v);
            let mp = fin_gradient_metric(&fp, &gp, Some(3.0)).unwrap();
            let mq = fin_gradient_metric(&fq, &gq, Some(3.0)).unwrap();
            assert!(mq.max < mp.max && mq.mean < mp.mean, "W={w} V={v}: {mp:?} vs {mq:?}");
        }
    }
}

#[test]
fn maximum_principle_and_mirror_on_fins() {
    for variant in [Variant::Planarized, Variant::Protruding] {
        for mode in [InterfaceMode::DielectricContinuity, InterfaceMode::FixedPotential] {
            let g = build_geometry(variant, 2.5, 0.5, &Extents::default()).unwrap();
            let bc = BoundarySpec { gate_voltage: 0.8, interface_mode: mode, interface_potential: 0.3, ..Default::default() };
            let p = assemble(&g, &bc, None).unwrap();
            let (lo, hi) = p.dirichlet_bounds().unwrap();
            let f = p.solve(&SolverOptions { tol: TOL, ..Default::default() }).unwrap();
            assert!(f.phi.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
            assert!(f.mirror_asymmetry() < 10.0 * TOL * hi.abs().max(1.0));
        }
    }
}

#[test]
fn zero_gate_voltage_gives_zero_metric() {
    let (g, f) = fin(Variant::Protruding, 5, 0.0);
    let m = fin_gradient_metric(&f, &g, Some(3.0)).unwrap();
    assert_eq!((m.max, m.mean), (0.0, 0.0));
}

#[test]
fn metric_is_linear_in_gate_voltage() {
    for variant in [Variant::Planarized, Variant::Protruding] {
        let (g, f1) = fin(variant, 5, 1.0);
        let (_, f2) = fin(variant, 5, 2.0);
        let a = fin_gradient_metric(&f1, &g, None).unwrap();
        let b = fin_gradient_metric(&f2, &g, None).unwrap();
        assert!((b.max / a.max - 2.0).abs() < 1e-8);
        assert!((b.mean / a.mean - 2.0).abs() < 1e-8);
    }
}

#[test]
fn sweep_order_does_not_change_solution() {
    let g = build_geometry(Variant::Protruding, 4.0, 0.5, &Extents::default()).unwrap();
    let p = assemble(&g, &BoundarySpec::default(), None).unwrap();
    let rb = p.solve(&SolverOptions { tol: TOL, ..Default::default() }).unwrap();
    let lx = p.solve(&SolverOptions { tol: TOL, order: SweepOrder::Lexicographic, ..Default::default() }).unwrap();
    let d = rb.phi.iter().zip(&lx.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 10.0 * TOL, "{d}");
}

#[test]
fn fixed_potential_pins_interface_nodes() {
    let g = build_geometry(Variant::Planarized, 2.5, 0.5, &Extents::default()).unwrap();
    let bc = BoundarySpec { interface_mode: InterfaceMode::FixedPotential, interface_potential: 0.42, ..Default::default() };
    let f = solve_poisson(&g, &bc, None, TOL, 100_000).unwrap();
    let (a, _) = g.fin_cols;
    assert_eq!(f.at(g.fin_top - 1, a), 0.42);
    assert_eq!(f.at(g.fin_top - 5, a), 0.42);
}

#[test]
fn empty_window_is_an_error() {
    let (g, f) = fin(Variant::Planarized, 3, 1.0);
    assert_eq!(fin_gradient_metric(&f, &g, Some(0.0)), Err(ElectrostaticsError::EmptyFin));
}

#[test]
fn non_convergence_is_reported() {
    let g = build_geometry(Variant::Planarized, 2.5, 0.5, &Extents::default()).unwrap();
    let e = solve_poisson(&g, &BoundarySpec::default(), None, 1e-12, 5).unwrap_err();
    assert!(matches!(e, ElectrostaticsError::NotConverged { iterations: 5, .. }));
    assert!(matches!(solve_poisson(&g, &BoundarySpec::default(), None, 0.0, 5), Err(ElectrostaticsError::BadTolerance(_))));
}

#[test]
fn contour_bands_are_monotone_in_potential() {
    let (_, f) = fin(Variant::Protruding, 5, 1.0);
    let c = contour_quantize(&f, 10).unwrap();
    let mut pairs: Vec<(f64, usize)> = f.phi.iter().copied().zip(c.labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplace_is_linear(alpha in -3.0f64..3.0, seed_v in 0.1f64..2.0) {
        let g = build_geometry(Variant::Planarized, 2.0, 0.5, &Extents::default()).unwrap();
        let bc = BoundarySpec { gate_voltage: seed_v, ..Default::default() };
        let a = solve_poisson(&g, &bc, None, TOL, 100_000).unwrap();
        let b = solve_poisson(&g, &BoundarySpec { gate_voltage: alpha * seed_v, ..bc }, None, TOL, 100_000).unwrap();
        let scale = seed_v.abs().max(1.0) * alpha.abs().max(1.0);
        for (x, y) in a.phi.iter().zip(&b.phi) {
            prop_assert!((alpha * x - y).abs() < 10.0 * TOL * scale);
        }
    }

    #[test]
    fn dirichlet_bounds_hold_for_random_plates(top in -2.0f64..2.0, bottom in -2.0f64..2.0, n in 5usize..30) {
        let mut p = PoissonProblem::new(n, 6, 0.5);
        for i in 0..n {
            let e = p.idx(i, 2);
            p.eps[e] = 3.9;
        }
        for iy in 0..6 {
            p.set_dirichlet(0, iy, bottom);
            p.set_dirichlet(n - 1, iy, top);
        }
        let f = p.solve(&SolverOptions { tol: TOL, ..Default::default() }).unwrap();
        let (lo, hi) = (top.min(bottom), top.max(bottom));
        prop_assert!(f.phi.iter().all(|&x| x >= lo - 1e-12 && x <= hi + 1e-12));
    }
}
