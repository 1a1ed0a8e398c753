use lagfib_core::models::FibrationModel;
use lagfib_core::poly_geometry::*;
use proptest::prelude::*;

fn base(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn any_base() -> impl Strategy<Value = Vec<f64>> {
    (2usize..6).prop_flat_map(base)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zeta0_is_a_root_and_maximal(v in any_base()) {
        let b = BaseParams::new(v).unwrap();
        let p = build_poly(&b);
        prop_assume!(!on_discriminant(&b, 1e-4));
        let z = zeta0(&b).unwrap();
        prop_assert!(p.eval(z).abs() <= 1e-10 * p.scale());
        for r in p.roots(0.0) {
            if r.im.abs() <= 1e-9 * p.scale() {
                prop_assert!(r.re <= z + 1e-8 * p.scale());
            }
        }
    }

    #[test]
    fn zeta0_is_non_negative(v in any_base()) {
        let b = BaseParams::new(v).unwrap();
        prop_assert!(zeta0(&b).unwrap() >= -1e-12);
    }

    #[test]
    fn derivative_equals_q_at_root(v in any_base()) {
        let b = BaseParams::new(v).unwrap();
        let p = build_poly(&b);
        let z = zeta0(&b).unwrap();
        let (q0, _) = q_factor_at(&p, z);
        prop_assert!((p.derivative(z) - q0).abs() <= 1e-10 * p.scale().powi(2));
    }

    #[test]
    fn gradient_matches_central_differences(v in base(3)) {
        let b = BaseParams::new(v.clone()).unwrap();
        prop_assume!(dist_to_discriminant(&b) > 0.1);
        let g = zeta0_gradient(&b).unwrap();
        let h = 1e-5;
        for i in 0..3 {
            let mut p = v.clone();
            p[i] += h;
            let up = zeta0(&BaseParams::new(p.clone()).unwrap()).unwrap();
            p[i] -= 2.0 * h;
            let down = zeta0(&BaseParams::new(p).unwrap()).unwrap();
            let fd = (up - down) / (2.0 * h);
            let scale = g.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-3);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * scale, "i={} fd={} g={}", i, fd, g[i]);
        }
    }

    #[test]
    fn distance_is_symmetric_in_b1(v in base(3)) {
        let b = BaseParams::new(v.clone()).unwrap();
        let m = BaseParams::new(vec![-v[0], v[1], v[2]]).unwrap();
        prop_assert_eq!(dist_to_discriminant(&b), dist_to_discriminant(&m));
    }
}

#[test]
fn membership_matches_legs_on_grids() {
    for steps in [10usize, 11] {
        let axis: Vec<f64> = (0..steps).map(|k| -1.0 + 2.0 * k as f64 / (steps - 1) as f64).collect();
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    let b = BaseParams::new(vec![x, y, z]).unwrap();
                    let analytic = dist_to_discriminant(&b) < 1e-9;
                    assert_eq!(on_discriminant(&b, default_tol_disc(&b)), analytic, "{x} {y} {z}");
                }
            }
        }
    }
}

#[test]
fn zeta_eps_is_smooth_across_the_discriminant() {
    let eps = FibrationModel::harvey_lawson(3).unwrap().eps;
    let ze = |v: &[f64]| root_profile(&BaseParams::from_slice(v).unwrap(), eps).unwrap().zeta_eps;
    for foot in [[0.0, 1.0, 1.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [0.0, 0.4, 0.4]] {
        for i in 0..3 {
            let quotient = |h: f64| {
                let mut p = foot.to_vec();
                p[i] += h;
                let up = ze(&p);
                p[i] -= 2.0 * h;
                (up - ze(&p)) / (2.0 * h)
            };
            let (a, b) = (quotient(1e-3), quotient(5e-4));
            assert!(a.is_finite() && b.is_finite());
            if a.abs() > 1e-8 {
                assert!((b / a - 1.0).abs() <= 0.05, "{foot:?} {i}: {a} {b}");
            } else {
                assert!(b.abs() <= 1e-8);
            }
        }
    }
}
