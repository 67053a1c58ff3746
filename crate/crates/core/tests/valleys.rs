use lpoint_core::valleys::*;
use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use proptest::prelude::*;

/// Oracle: project the full inverse-mass tensor onto the growth axis.
fn tensor_mass(axis: [f64; 3], ml: f64, mt: f64, growth: [f64; 3]) -> f64 {
    let a = Vector3::from(axis).normalize();
    let g = Vector3::from(growth).normalize();
    let inv = Matrix3::identity() / mt + a * a.transpose() * (1.0 / ml - 1.0 / mt);
    1.0 / (g.transpose() * inv * g)[0]
}

#[test]
fn energy_scale_from_codata() {
    let (h, m0, e) = (6.626_070_15e-34, 9.109_383_7015e-31, 1.602_176_634e-19);
    let want = h * h / (8.0 * m0 * 1e-18) / e;
    assert!((box_energy_scale_ev() - want).abs() < 1e-12 * want);
}

#[test]
fn default_x0_masses_are_anisotropic() {
    assert!(X0_ML / X0_MT > 4.0);
}

#[test]
fn default_masses_give_two_plus_four_and_one_plus_three() {
    let x = split_valleys(&ValleySet::x0(X0_ML, X0_MT, parse_axis("001").unwrap()).unwrap(), 5.0).unwrap();
    assert_eq!(x.degeneracies(), vec![2, 4]);
    assert!((x.groups[0].m_z - X0_ML).abs() < 1e-12);
    let l = split_valleys(&ValleySet::l(L_ML, L_MT, parse_axis("111").unwrap()).unwrap(), 5.0).unwrap();
    assert_eq!(l.degeneracies(), vec![1, 3]);
    assert_eq!(l.ground_degeneracy, 1);
}

fn masses() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..3.0, 1.0001f64..50.0).prop_map(|(mt, r)| (mt * r, mt))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn degeneracy_patterns_hold((ml, mt) in masses()) {
        for i in 0..20 {
            let w = 0.5 + 1.5 * i as f64;
            let x = split_valleys(&ValleySet::x0(ml, mt, [0.0, 0.0, 1.0]).unwrap(), w).unwrap();
            prop_assert_eq!(x.degeneracies(), vec![2, 4]);
            let l = split_valleys(&ValleySet::l(ml, mt, [1.0, 1.0, 1.0]).unwrap(), w).unwrap();
            prop_assert_eq!(l.degeneracies(), vec![1, 3]);
            let half = split_valleys(&ValleySet::l(ml, mt, [1.0, 1.0, 1.0]).unwrap(), w / 2.0).unwrap();
            prop_assert!((half.splitting_ev / l.splitting_ev - 4.0).abs() < 4e-9);
        }
    }

    #[test]
    fn mass_matches_tensor_oracle(
        (ml, mt) in masses(),
        a in prop::array::uniform3(-1.0f64..1.0),
        g in prop::array::uniform3(-1.0f64..1.0),
    ) {
        prop_assume!(a.iter().map(|x| x * x).sum::<f64>() > 1e-3 && g.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let v = Valley { axis: a, ml, mt, family: ValleyFamily::L };
        let m = confinement_mass(&v, g).unwrap();
        prop_assert!((m - tensor_mass(a, ml, mt, g)).abs() < 1e-10 * m);
        prop_assert!(m >= mt.min(ml) * (1.0 - 1e-12) && m <= ml.max(mt) * (1.0 + 1e-12));
    }

    #[test]
    fn rotation_invariance(
        (ml, mt) in masses(),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.1f64..3.1,
        w in 0.5f64..20.0,
    ) {
        prop_assume!(axis.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let r = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle);
        let m = r.matrix();
        let rm = [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]];
        for set in [ValleySet::x0(ml, mt, [0.0, 0.0, 1.0]).unwrap(), ValleySet::l(ml, mt, [1.0, 1.0, 1.0]).unwrap()] {
            let a = split_valleys(&set, w).unwrap();
            let b = split_valleys(&set.rotated(rm), w).unwrap();
            prop_assert_eq!(a.degeneracies(), b.degeneracies());
            for (ga, gb) in a.groups.iter().zip(&b.groups) {
                prop_assert!((ga.energy_ev - gb.energy_ev).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn isotropic_masses_do_not_split() {
    let r = split_valleys(&ValleySet::l(0.5, 0.5, [1.0, 1.0, 1.0]).unwrap(), 3.0).unwrap();
    assert_eq!(r.degeneracies(), vec![4]);
    assert_eq!(r.splitting_ev, 0.0);
}
