use lagfib_core::models::FibrationModel;
use lagfib_core::periods::*;
use lagfib_core::poly_geometry::{dist_to_discriminant, BaseParams};
use proptest::prelude::*;

fn bp(v: &[f64]) -> BaseParams {
    BaseParams::from_slice(v).unwrap()
}

/// `α` for n = 2 in closed form: `−arccosh(√(R²+1)/R)` with `R² = b₂²/4 + b₁²`.
fn alpha_two_dim(b1: f64, b2: f64) -> f64 {
    let r = (0.25 * b2 * b2 + b1 * b1).sqrt();
    -((r * r + 1.0).sqrt() / r).acosh()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracles_agree_in_three_dimensions(v in prop::collection::vec(-1.5..1.5f64, 3)) {
        let b = bp(&v);
        prop_assume!(dist_to_discriminant(&b) > 0.1);
        let q = alpha_quadrature(&b).unwrap();
        let f = alpha_flow_oracle(&b).unwrap();
        prop_assert!(((q - f) / q).abs() <= 1e-5, "{} {}", q, f);
    }

    #[test]
    fn three_oracles_in_two_dimensions(b1 in 0.1..2.0f64, b2 in -2.0..2.0f64, sign in prop::bool::ANY) {
        let b1 = if sign { b1 } else { -b1 };
        let b = bp(&[b1, b2]);
        let exact = alpha_two_dim(b1, b2);
        let q = alpha_quadrature(&b).unwrap();
        let f = alpha_flow_oracle(&b).unwrap();
        prop_assert!((q - exact).abs() <= 1e-10 * exact.abs().max(1.0));
        prop_assert!(((f - exact) / exact).abs() <= 1e-6);
    }

    #[test]
    fn alpha_symmetries(v in prop::collection::vec(-1.5..1.5f64, 4)) {
        let b = bp(&v);
        prop_assume!(dist_to_discriminant(&b) > 1e-3);
        let a = alpha_quadrature(&b).unwrap();
        let flipped = alpha_quadrature(&bp(&[-v[0], v[1], v[2], v[3]])).unwrap();
        let permuted = alpha_quadrature(&bp(&[v[0], v[3], v[1], v[2]])).unwrap();
        prop_assert!((a - flipped).abs() <= 1e-10 * a.abs().max(1.0));
        prop_assert!((a - permuted).abs() <= 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn bound_dominates_alpha(v in prop::collection::vec(-1.5..1.5f64, 3)) {
        let b = bp(&v);
        prop_assume!(dist_to_discriminant(&b) > 1e-3);
        let ratio = alpha_quadrature(&b).unwrap() / alpha_bound(&b).unwrap();
        prop_assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12, "{}", ratio);
    }

    #[test]
    fn ff22_basis_properties(s1 in -1.0..1.0f64, s2 in -1.0..1.0f64, r in 0.1..0.9f64, c in -5.0..5.0f64) {
        prop_assume!(s1.hypot(s2) > 1e-3);
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let h = DeformationH::parse("b1^2*b3 + sin(b2)", 3).unwrap();
        let hc = DeformationH::parse(&format!("b1^2*b3 + sin(b2) + {c:?}"), 3).unwrap();
        let b = bp(&[s1, s2, r]);
        let p = period_basis(&ctx, &h, &b, None).unwrap();
        let q = period_basis(&ctx, &hc, &b, None).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(&p.tau[1].comps, &vec![0.0, 2.0 * std::f64::consts::PI, 0.0]);
        prop_assert_eq!(&p.tau[2].comps, &vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn ff22_closedness_is_second_order(s1 in 0.3..1.0f64, s2 in -1.0..1.0f64, r in 0.2..0.8f64) {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let h = DeformationH::parse("b1*b2^2 + exp(b3)*b1", 3).unwrap();
        let form = |x: &[f64], reference: Option<&OneFormSample>| -> lagfib_core::Result<OneFormSample> {
            let t = ff22_tau0(x, reference)?;
            let g = h.gradient(&ctx.model, x)?;
            Ok(OneFormSample { comps: t.comps.iter().zip(&g).map(|(a, b)| a + b).collect(), ..t })
        };
        let b = [s1, s2, r];
        let e1 = max_abs_entry(&closedness_residual(form, &b, 2e-2).unwrap());
        let e2 = max_abs_entry(&closedness_residual(form, &b, 1e-2).unwrap());
        prop_assert!((3.5..=4.5).contains(&(e1 / e2)), "{} {}", e1, e2);
    }
}

#[test]
fn hl_regular_periods_are_constant() {
    let ctx = PeriodContext::new(FibrationModel::harvey_lawson(3).unwrap()).unwrap();
    let h = DeformationH::zero(3);
    for v in [[1.0, 0.0, 0.0], [0.4, 0.7, -0.3], [-0.8, -0.2, 0.9]] {
        let p = period_basis(&ctx, &h, &bp(&v), None).unwrap();
        for k in 1..3 {
            let mut want = vec![0.0; 3];
            want[k] = ctx.regular_periods[k - 1];
            assert_eq!(p.tau[k].comps, want);
        }
    }
}

#[test]
fn exact_differential_is_closed() {
    let model = FibrationModel::focus_focus22();
    let h = DeformationH::parse("b1*b2^2 + exp(b3)*b1", 3).unwrap();
    let form = |x: &[f64], _: Option<&OneFormSample>| -> lagfib_core::Result<OneFormSample> {
        Ok(OneFormSample { base: x.to_vec(), comps: h.gradient(&model, x)?, branch: vec![0; 3] })
    };
    let c = closedness_residual(form, &[0.4, -0.3, 0.5], 1e-5).unwrap();
    assert!(max_abs_entry(&c) <= 1e-8);
}
