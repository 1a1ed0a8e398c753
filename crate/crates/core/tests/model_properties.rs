use std::f64::consts::PI;

use lagfib_core::models::*;
use lagfib_core::ode::OdeOptions;
use lagfib_core::poly_geometry::BaseParams;
use proptest::prelude::*;

fn hl_point() -> impl Strategy<Value = PhasePoint> {
    prop::collection::vec(-1.0..1.0f64, 6).prop_map(|c| PhasePoint::new(c).unwrap())
}

fn ff_point() -> impl Strategy<Value = PhasePoint> {
    (prop::collection::vec(-1.0..1.0f64, 4), 0.05..0.95f64, 0.0..1.0f64)
        .prop_map(|(c, r, th)| PhasePoint::new(vec![c[0], c[1], c[2], c[3], r, th]).unwrap())
}

fn models_and_points() -> impl Strategy<Value = (FibrationModel, PhasePoint)> {
    prop_oneof![
        hl_point().prop_map(|z| (FibrationModel::harvey_lawson(3).unwrap(), z)),
        ff_point().prop_map(|z| (FibrationModel::focus_focus22(), z)),
    ]
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flows_preserve_fibres((m, z) in models_and_points(), i in 0usize..3, t in -10.0..10.0f64) {
        // The cubic Hamiltonian of the Harvey–Lawson map has orbits that
        // escape in finite time; the property is checked where the flow exists.
        let moved = m.flow(i, t, &z);
        prop_assume!(moved.is_ok());
        let moved = moved.unwrap();
        let before = m.eval_f(&z);
        let after = m.eval_f(&moved);
        prop_assert!(sup(&before, &after) <= 1e-7 * (1.0 + before.iter().map(|v| v.abs()).fold(0.0, f64::max)));
    }

    #[test]
    fn flows_are_symplectic((m, z) in models_and_points(), i in 0usize..3, t in -2.0..2.0f64) {
        let dim = z.dim();
        prop_assume!(m.flow(i, t, &z).map(|p| p.coords().iter().all(|v| v.abs() < 10.0)).unwrap_or(false));
        let h = 1e-5;
        let mut jac = vec![vec![0.0; dim]; dim];
        for k in 0..dim {
            let mut p = z.coords().to_vec();
            p[k] += h;
            let up = m.flow(i, t, &PhasePoint::new(p.clone()).unwrap()).unwrap();
            p[k] -= 2.0 * h;
            let down = m.flow(i, t, &PhasePoint::new(p).unwrap()).unwrap();
            for r in 0..dim {
                jac[r][k] = (up.coords()[r] - down.coords()[r]) / (2.0 * h);
            }
        }
        let scale = jac.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        for a in 0..dim {
            for b in 0..dim {
                let ea: Vec<f64> = (0..dim).map(|r| jac[r][a]).collect();
                let eb: Vec<f64> = (0..dim).map(|r| jac[r][b]).collect();
                let unit = |k: usize| (0..dim).map(|r| f64::from(u8::from(r == k))).collect::<Vec<_>>();
                let defect = omega0(&ea, &eb) - omega0(&unit(a), &unit(b));
                prop_assert!(defect.abs() <= 1e-5 * scale * scale, "{} {} {}", a, b, defect);
            }
        }
    }

    #[test]
    fn closed_forms_match_integration((m, z) in models_and_points(), i in 0usize..3, t in -5.0..5.0f64) {
        if let Some(exact) = m.flow_closed(i, t, &z) {
            let ode = m.flow_ode(i, t, &z, &OdeOptions::default()).unwrap();
            let scale = exact.coords().iter().map(|v| v.abs()).fold(1.0, f64::max);
            prop_assert!(sup(exact.coords(), ode.coords()) <= 1e-8 * scale);
        }
    }

    #[test]
    fn brackets_vanish((m, z) in models_and_points()) {
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(m.poisson_bracket(i, j, &z).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn ff22_regular_flows_are_periodic(z in ff_point()) {
        let m = FibrationModel::focus_focus22();
        prop_assert!(m.phase_distance(&m.flow(1, 2.0 * PI, &z).unwrap(), &z) <= 1e-12);
        prop_assert!(m.phase_distance(&m.flow(2, 1.0, &z).unwrap(), &z) <= 1e-12);
    }

    #[test]
    fn hl_circle_flows_return_after_pi(z in hl_point(), k in 1usize..3) {
        let m = FibrationModel::harvey_lawson(3).unwrap();
        prop_assume!(z.z(0).norm() > 0.1 || z.z(k).norm() > 0.1);
        let t = m.first_return_time(k, &z, 20.0, &OdeOptions::default()).unwrap();
        prop_assert!((t - PI).abs() <= 1e-8, "{}", t);
    }

    #[test]
    fn special_lagrangian((m, z) in models_and_points()) {
        prop_assume!(m.is_hl());
        prop_assert!(special_lagrangian_residual(&z) <= 1e-9);
    }

    #[test]
    fn sections_lie_over_their_base_point(v in prop::collection::vec(-1.5..1.5f64, 3)) {
        let m = FibrationModel::harvey_lawson(3).unwrap();
        let b = BaseParams::new(v.clone()).unwrap();
        let plus = m.section(SectionKind::Plus, &b).unwrap();
        let minus = m.section(SectionKind::Minus, &b).unwrap();
        prop_assert!(sup(&m.eval_f(&plus), &v) <= 1e-10);
        prop_assert!(sup(&m.eval_f(&minus), &v) <= 1e-10);
        let (u, rest) = project_pi(&plus);
        prop_assert!((u - 1.0).abs() <= 1e-10);
        prop_assert!(sup(&rest, &v) <= 1e-10);
        prop_assert!(m.phase_distance(&involution_a(&minus), &plus) <= 1e-10);
    }
}
