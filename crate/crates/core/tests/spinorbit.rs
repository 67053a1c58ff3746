use lpoint_core::grouptheory::LambdaLabel;
use lpoint_core::lattice::KVector;
use lpoint_core::spinorbit::*;
use lpoint_core::linalg::{eigh, inner};
use lpoint_core::tightbinding::{apply_pt, build_hamiltonian, spin_operator, TbParams};
use proptest::prelude::*;

fn arb3() -> impl Strategy<Value = [f64; 3]> {
    [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]
}

fn arb_field() -> impl Strategy<Value = MultipoleField> {
    (-2.0f64..2.0, arb3(), arb3(), arb3(), -2.0f64..2.0, -2.0f64..2.0).prop_map(|(q0, q, m, t, g0, qxyz)| {
        MultipoleField { q0, q_dip: q, m_dip: m, t_dip: t, g0, q_xyz: qxyz }
    })
}

fn arb_k() -> impl Strategy<Value = KVector> {
    arb3().prop_map(KVector::from_array)
}

fn growth_rashba(strength: f64) -> MultipoleField {
    MultipoleField { q_dip: [strength; 3], ..Default::default() }
}

#[test]
fn bsvsp_groups_cancel_with_growth_axis_rashba() {
    let k = KVector::new(0.25, 0.25, 0.25);
    let r = bsvsp_check(&TbParams::silicon(), &growth_rashba(0.3), k, 1e-8).unwrap();
    assert_eq!(r.bands.len(), 20);
    assert!(r.max_group_spin() < 1e-10, "{}", r.max_group_spin());
    for g in &r.groups {
        assert_eq!(g.members.len() % 2, 0);
        assert_ne!(g.label, LambdaLabel::Unresolved);
    }
    let pair = r.groups.iter().find(|g| g.label == LambdaLabel::Lambda45).expect("a Λ4+Λ5 pair exists");
    let a = &r.bands[pair.members[0]].spin_expectation;
    let b = &r.bands[pair.members[1]].spin_expectation;
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(na > 0.1, "partners should be individually polarised");
    assert!((na - nb).abs() < 1e-10);
    for i in 0..3 {
        assert!((a[i] + b[i]).abs() < 1e-10);
    }
}

#[test]
fn zero_field_groups_are_kramers_pairs() {
    let r = bsvsp_check(&TbParams::silicon(), &MultipoleField::zero(), KVector::new(0.1, 0.1, 0.1), 1e-8).unwrap();
    for g in &r.groups {
        assert_eq!(g.members.len() % 2, 0);
        assert!(g.spin_sum_norm() < 1e-10);
    }
}

#[test]
fn pt_partner_has_opposite_spin() {
    // oracle: PT maps each eigenstate into its own level with reversed spin
    let k = KVector::new(0.2, 0.2, 0.2);
    let h = build_hamiltonian(&TbParams::silicon(), k);
    let eig = eigh(&h).unwrap();
    let sigma: Vec<_> = (0..3).map(spin_operator).collect();
    for j in 0..20 {
        let v = eig.vector(j);
        let w = apply_pt(&v);
        let hw = h.mul_vec(&w);
        let res = hw.iter().zip(&w).map(|(a, b)| (a - b * eig.values[j]).norm()).fold(0.0, f64::max);
        assert!(res < 1e-9);
        for s in &sigma {
            let a = inner(&v, &s.mul_vec(&v)).re;
            let b = inner(&w, &s.mul_vec(&w)).re;
            assert!((a + b).abs() < 1e-10);
        }
    }
}

#[test]
fn off_axis_bsvsp_rejected() {
    let e = bsvsp_check(&TbParams::silicon(), &MultipoleField::zero(), KVector::new(0.1, 0.0, 0.1), 1e-8);
    assert!(matches!(e, Err(SpinOrbitError::OffLambdaAxis(..))));
}

#[test]
fn zero_field_zero_expectation() {
    for o in POrbital::ALL {
        for s in [1, -1] {
            assert_eq!(orbital_soc_expectation(o, s, &MultipoleField::zero(), KVector::new(0.3, 0.3, 0.3)).unwrap(), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn dresselhaus_vanishes_on_lambda(t in -2.0f64..2.0, q in -5.0f64..5.0) {
        let f = MultipoleField { q_xyz: q, ..Default::default() };
        prop_assert!(h_dresselhaus(&f, KVector::new(t, t, t)).is_zero());
    }

    #[test]
    fn spin_summed_equality(f in arb_field(), t in -2.0f64..2.0) {
        prop_assert!(spin_summed_imbalance(&f, KVector::new(t, t, t)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn hermitian(f in arb_field(), k in arb_k()) {
        prop_assert_eq!(h_total(&f, k).hermiticity_error(), 0.0);
    }

    #[test]
    fn time_reversal_without_magnetic_terms(f in arb_field(), k in arb_k()) {
        let f = MultipoleField { m_dip: [0.0; 3], t_dip: [0.0; 3], ..f };
        let a = h_total(&f, k).eigenvalues();
        let b = h_total(&f, -k).eigenvalues();
        prop_assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    }

    #[test]
    fn trace_decomposition(f in arb_field(), k in arb_k()) {
        prop_assert_eq!(h_rashba(&f, k).trace(), 0.0);
        let t_only = MultipoleField { t_dip: f.t_dip, ..Default::default() };
        let h = h_total(&t_only, k);
        prop_assert_eq!(h.c, [0.0; 3]);
        let e = h.eigenvalues();
        prop_assert_eq!(e[0], e[1]);
    }

    #[test]
    fn rashba_planar_form(kx in -2.0f64..2.0, ky in -2.0f64..2.0) {
        let f = MultipoleField { q_dip: [0.0, 0.0, 1.0], ..Default::default() };
        let h = h_rashba(&f, KVector::new(kx, ky, 0.0));
        prop_assert_eq!(h.c, [-ky, kx, 0.0]);
    }
}
