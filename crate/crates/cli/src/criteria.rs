//! The acceptance suite. Each criterion reports its measurements against
//! fixed thresholds; a criterion passes when every non-informational
//! measurement passes and it finishes inside its time budget.

use std::f64::consts::PI;
use std::time::Instant;

use lagfib_core::classify::{self, DeformationPair, Status};
use lagfib_core::expr::{parse_expr, EvalContext, EvalPolicy, Expr, Var};
use lagfib_core::models::{self, FibrationModel, PhasePoint, SectionKind};
use lagfib_core::monodromy::{self, Family, IntMatrix, LoopSpec};
use lagfib_core::ode::OdeOptions;
use lagfib_core::periods::{self, DeformationH, OneFormSample, PeriodContext};
use lagfib_core::poly_geometry::{self, BaseParams};
use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands;

pub const ALL: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub const CLASSIFICATION_SCOPE: &str =
    "finite-order, finite-grid operationalization of the germ-level classification; not a proof of equivalence";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
    /// Reported but not counted towards the verdict.
    pub informational: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub elapsed_s: f64,
    pub budget_s: f64,
    pub label: Option<&'static str>,
}

impl CriterionReport {
    /// One line: `PASS  3 dual-oracle alpha: name=value (threshold) …`.
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let parts: Vec<String> = self
            .measurements
            .iter()
            .map(|m| {
                let mark = if m.informational {
                    " info"
                } else if m.pass {
                    ""
                } else {
                    " FAIL"
                };
                format!("{}={:.4e} ({}{mark})", m.name, m.value, m.threshold)
            })
            .collect();
        let mut s = format!("{verdict} {:>2} {}: {}", self.id, self.name, parts.join(", "));
        if let Some(e) = &self.error {
            s.push_str(&format!(" [error: {e}]"));
        }
        s
    }
}

#[derive(Default)]
struct Sheet {
    ms: Vec<Measurement>,
    notes: Vec<String>,
}

impl Sheet {
    fn push(&mut self, name: &str, value: f64, threshold: String, pass: bool) {
        self.ms.push(Measurement {
            name: name.into(),
            value,
            threshold,
            pass,
            informational: false,
        });
    }

    fn le(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value, format!("<= {tol:e}"), value <= tol);
    }

    fn ge(&mut self, name: &str, value: f64, tol: f64) {
        self.push(name, value, format!(">= {tol}"), value >= tol);
    }

    fn within(&mut self, name: &str, value: f64, lo: f64, hi: f64) {
        self.push(name, value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value));
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.push(name, ok as i64 as f64, "== 1".into(), ok);
    }

    fn info(&mut self, name: &str, value: f64, what: &str) {
        self.ms.push(Measurement {
            name: name.into(),
            value,
            threshold: what.into(),
            pass: true,
            informational: true,
        });
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

type Body = fn(&mut Sheet, u64) -> lagfib_core::Result<()>;

fn definition(id: u8) -> (&'static str, f64, Body, Option<&'static str>) {
    match id {
        1 => ("involutivity", 1.0, c1_involutivity, None),
        2 => ("flow exactness", 5.0, c2_flows, None),
        3 => ("dual-oracle alpha", 30.0, c3_alpha, None),
        4 => ("blow-up exponents", 60.0, c4_blowup, None),
        5 => ("zeta0 gradient", 1.0, c5_gradient, None),
        6 => ("monodromy", 120.0, c6_monodromy, None),
        7 => ("closedness", 5.0, c7_closedness, None),
        8 => ("classification pipeline", 120.0, c8_classification, Some(CLASSIFICATION_SCOPE)),
        9 => ("special Lagrangian residual", 1.0, c9_special_lagrangian, None),
        10 => ("sections", 1.0, c10_sections, None),
        11 => ("determinism and parser", 5.0, c11_determinism, None),
        _ => unreachable!("criterion ids are 1..=11"),
    }
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionReport {
    let (name, budget, body, label) = definition(id);
    let mut sheet = Sheet::default();
    let start = Instant::now();
    let outcome = body(&mut sheet, seed.wrapping_add(id as u64));
    let elapsed = start.elapsed().as_secs_f64();
    let error = outcome.err().map(|e| e.to_string());
    let pass = error.is_none() && elapsed <= budget && sheet.ms.iter().all(|m| m.informational || m.pass);
    CriterionReport {
        id,
        name,
        pass,
        measurements: sheet.ms,
        notes: sheet.notes,
        error,
        elapsed_s: elapsed,
        budget_s: budget,
        label,
    }
}

pub fn run_all(ids: &[u8], seed: u64) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run_criterion(id, seed)).collect()
}

// ---------------------------------------------------------------- sampling

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-radius..radius)).collect();
        if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= radius {
            return v;
        }
    }
}

/// Base points in `[-1.5, 1.5]ⁿ` at distance greater than `min_dist` from Δ.
fn base_points(rng: &mut ChaCha8Rng, n: usize, count: usize, min_dist: f64) -> Vec<BaseParams> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = BaseParams::new(v).expect("finite");
        if poly_geometry::dist_to_discriminant(&b) > min_dist {
            out.push(b);
        }
    }
    out
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

// ---------------------------------------------------------------- 1

fn c1_involutivity(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    for (label, model) in [
        ("hl2_max_bracket", FibrationModel::harvey_lawson(2)?),
        ("hl3_max_bracket", FibrationModel::harvey_lawson(3)?),
        ("ff22_max_bracket", FibrationModel::focus_focus22()),
    ] {
        let n = model.n();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let z = PhasePoint::new(in_ball(&mut r, model.phase_dim(), 2.0))?;
            for i in 0..n {
                for j in i + 1..n {
                    worst = worst.max(model.poisson_bracket(i, j, &z).abs());
                }
            }
        }
        s.le(label, worst, 1e-9);
    }
    Ok(())
}

// ---------------------------------------------------------------- 2

fn c2_flows(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    let opts = OdeOptions::default();
    let ts = linspace(-5.0, 5.0, 20);

    let ff = FibrationModel::focus_focus22();
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let mut c = in_ball(&mut r, 6, 1.0);
        c[4] = r.random_range(0.1..0.9);
        c[5] = r.random_range(0.0..1.0);
        let z = PhasePoint::new(c)?;
        for i in 0..3 {
            for &t in &ts {
                let exact = ff.flow_closed(i, t, &z).expect("closed form");
                let num = ff.flow_ode(i, t, &z, &opts)?;
                worst = worst.max(ff.phase_distance(&num, &exact) / norm(exact.coords()).max(1.0));
            }
        }
    }
    s.le("ff22_ode_vs_closed_rel", worst, 1e-8);

    let hl = FibrationModel::harvey_lawson(3)?;
    let mut ret: f64 = 0.0;
    let mut rot: f64 = 0.0;
    for _ in 0..3 {
        let z = PhasePoint::new(in_ball(&mut r, 6, 1.5))?;
        for k in 1..3 {
            let t = hl.first_return_time(k, &z, 10.0, &opts)?;
            ret = ret.max((t - PI).abs());
            for &t in &ts {
                let exact = hl.flow_closed(k, t, &z).expect("closed form");
                let num = hl.flow_ode(k, t, &z, &opts)?;
                rot = rot.max(max_diff(num.coords(), exact.coords()) / norm(exact.coords()).max(1.0));
            }
        }
    }
    s.le("hl_return_time_minus_pi", ret, 1e-8);
    s.le("hl_ode_vs_rotation_rel", rot, 1e-8);
    Ok(())
}

// ---------------------------------------------------------------- 3

/// `α` for n = 2 in closed form, `−arccosh(√(R²+1)/R)` with `R² = b₂²/4 + b₁²`.
pub fn alpha_two_dim(b1: f64, b2: f64) -> f64 {
    let r = (0.25 * b2 * b2 + b1 * b1).sqrt();
    -((r * r + 1.0).sqrt() / r).acosh()
}

fn c3_alpha(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for b in base_points(&mut r, 3, 50, 0.1) {
        let q = periods::alpha_quadrature(&b)?;
        let f = periods::alpha_flow_oracle(&b)?;
        worst = worst.max(((q - f) / q).abs());
    }
    s.le("n3_quadrature_vs_flow_rel", worst, 1e-5);

    let b = BaseParams::new(vec![1.0, 0.0])?;
    let exact = -(1.0 + 2f64.sqrt()).ln();
    s.le("n2_quadrature_vs_closed_form", (periods::alpha_quadrature(&b)? - exact).abs(), 1e-10);
    s.le("n2_flow_vs_closed_form", (periods::alpha_flow_oracle(&b)? - exact).abs(), 1e-6);

    let mut q2: f64 = 0.0;
    let mut f2: f64 = 0.0;
    for b in base_points(&mut r, 2, 20, 0.1) {
        let c = alpha_two_dim(b[0], b[1]);
        q2 = q2.max((periods::alpha_quadrature(&b)? - c).abs());
        f2 = f2.max((periods::alpha_flow_oracle(&b)? - c).abs());
    }
    s.le("n2_seeded_quadrature_vs_closed_form", q2, 1e-10);
    s.le("n2_seeded_flow_vs_closed_form", f2, 1e-6);
    Ok(())
}

// ---------------------------------------------------------------- 4

pub const BLOWUP_WINDOW: (f64, f64) = (1e-4, 1e-1);
pub const BLOWUP_SAMPLES: usize = 20;

/// Leg approach: `(t, 1, 1)` meets the leg `{b₁ = 0, b₂ = b₃ ≥ 0}` at `(0, 1, 1)`.
pub fn leg_path(t: f64) -> Vec<f64> {
    vec![t, 1.0, 1.0]
}

/// Vertex approach along the ray `t·(0, 1, −1)`.
pub fn vertex_path(t: f64) -> Vec<f64> {
    vec![0.0, t, -t]
}

fn c4_blowup(s: &mut Sheet, _seed: u64) -> lagfib_core::Result<()> {
    let leg = periods::blowup_fit(leg_path, BLOWUP_WINDOW, BLOWUP_SAMPLES)?;
    let vertex = periods::blowup_fit(vertex_path, BLOWUP_WINDOW, BLOWUP_SAMPLES)?;
    s.within("alpha_leg_slope", leg.slope, -0.6, -0.4);
    s.ge("alpha_leg_r2", leg.r2, 0.98);
    s.within("alpha_vertex_slope", vertex.slope, -1.15, -0.85);
    s.ge("alpha_vertex_r2", vertex.r2, 0.98);

    let bound = |b: &BaseParams| periods::alpha_bound(b);
    let leg_b = periods::blowup_fit_of(leg_path, BLOWUP_WINDOW, BLOWUP_SAMPLES, bound)?;
    let vertex_b = periods::blowup_fit_of(vertex_path, BLOWUP_WINDOW, BLOWUP_SAMPLES, bound)?;
    s.info("bound_leg_slope", leg_b.slope, "-2/sqrt(Q(zeta0)) fit, leg");
    s.info("bound_leg_r2", leg_b.r2, "leg");
    s.info("bound_vertex_slope", vertex_b.slope, "-2/sqrt(Q(zeta0)) fit, vertex");
    s.info("bound_vertex_r2", vertex_b.r2, "vertex");

    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut skipped = 0usize;
    for path in [leg_path as fn(f64) -> Vec<f64>, vertex_path] {
        for t in periods::log_space(BLOWUP_WINDOW.0, BLOWUP_WINDOW.1, BLOWUP_SAMPLES) {
            let b = BaseParams::new(path(t))?;
            match (periods::alpha_quadrature(&b), periods::alpha_bound(&b)) {
                (Ok(a), Ok(m)) => {
                    lo = lo.min(a / m);
                    hi = hi.max(a / m);
                }
                _ => skipped += 1,
            }
        }
    }
    s.info("alpha_over_bound_min", lo, "alpha/bound on both paths");
    s.info("alpha_over_bound_max", hi, "alpha/bound on both paths, expected <= 1");
    s.info("samples_within_disc_tolerance", skipped as f64, "skipped by every fit");
    s.info("leg_fit_samples", leg.samples as f64, "of 20");
    s.info("vertex_fit_samples", vertex.samples as f64, "of 20");
    s.note("alpha grows logarithmically along both approaches; the power-law exponents belong to the bound -2/sqrt(Q(zeta0))");
    Ok(())
}

// ---------------------------------------------------------------- 5

fn c5_gradient(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for b in base_points(&mut r, 3, 100, 0.1) {
        let g = poly_geometry::zeta0_gradient(&b)?;
        let h = 1e-5;
        let mut fd = Vec::with_capacity(3);
        for i in 0..3 {
            let mut p = b.as_slice().to_vec();
            let mut m = p.clone();
            p[i] += h;
            m[i] -= h;
            let zp = poly_geometry::zeta0(&BaseParams::new(p)?)?;
            let zm = poly_geometry::zeta0(&BaseParams::new(m)?)?;
            fd.push((zp - zm) / (2.0 * h));
        }
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        worst = worst.max(norm(&diff) / norm(&g).max(1e-300));
    }
    s.le("max_rel_error", worst, 1e-5);
    Ok(())
}

// ---------------------------------------------------------------- 6

fn loop_matrices(ctx: &PeriodContext, loops: &[LoopSpec]) -> lagfib_core::Result<Vec<commands::LoopResult>> {
    let h = DeformationH::zero(ctx.model.n());
    commands::run_loops(ctx, &h, loops, None).map_err(|e| lagfib_core::Error::InvalidInput(e.message))
}

fn c6_monodromy(s: &mut Sheet, _seed: u64) -> lagfib_core::Result<()> {
    let mut residual: f64 = 0.0;

    let ff = PeriodContext::new(FibrationModel::focus_focus22())?;
    let expected_ff = &monodromy::expected_matrices(Family::Ff22)[0];
    let base = loop_matrices(&ff, &[LoopSpec::ff22_circle(0.5, 0.5, 64)?])?;
    residual = residual.max(base[0].residual);
    s.flag("ff22_exact", base[0].matrix == *expected_ff);
    let mut variants = Vec::new();
    for radius in [0.2, 0.8, 1.5] {
        variants.push(LoopSpec::ff22_circle(radius, 0.5, 64)?);
    }
    for k in [32, 128] {
        variants.push(LoopSpec::ff22_circle(0.5, 0.3, k)?);
    }
    let ff_var = loop_matrices(&ff, &variants)?;
    residual = ff_var.iter().fold(residual, |a, m| a.max(m.residual));
    s.flag("ff22_radius_k_independent", ff_var.iter().all(|m| m.matrix == *expected_ff));

    let hl = PeriodContext::new(FibrationModel::harvey_lawson(3)?)?;
    let gens = monodromy::expected_matrices(Family::Hl3);
    let loops = [
        LoopSpec::hl_leg(0, 0.3, 64)?,
        LoopSpec::hl_leg(1, 0.3, 64)?,
        LoopSpec::hl_leg(2, 0.3, 64)?,
        LoopSpec::hl_vertex(64)?,
    ];
    let m = loop_matrices(&hl, &loops)?;
    residual = m.iter().fold(residual, |a, x| a.max(x.residual));
    for x in &m {
        s.note(format!(
            "{}: {:?} = {}",
            x.label,
            x.matrix.0,
            x.identified.as_deref().unwrap_or("unidentified")
        ));
    }
    let mut found: Vec<&IntMatrix> = vec![&m[1].matrix, &m[2].matrix, &m[3].matrix];
    found.sort_by(|a, b| a.0.cmp(&b.0));
    let mut want: Vec<&IntMatrix> = gens.iter().collect();
    want.sort_by(|a, b| a.0.cmp(&b.0));
    s.flag("hl3_generator_set", found == want);
    s.flag("hl3_vertex_is_product", m[1].matrix.mul(&m[2].matrix) == m[3].matrix && m[3].matrix == gens[2]);
    s.flag("hl3_leg1_in_group", m[0].identified.is_some());

    let mut variants = Vec::new();
    for radius in [0.2, 0.45] {
        for leg in 0..3 {
            variants.push(LoopSpec::hl_leg(leg, radius, 64)?);
        }
    }
    for k in [32, 128] {
        for leg in 0..3 {
            variants.push(LoopSpec::hl_leg(leg, 0.3, k)?);
        }
        variants.push(LoopSpec::hl_vertex(k)?);
    }
    let v = loop_matrices(&hl, &variants)?;
    residual = v.iter().fold(residual, |a, x| a.max(x.residual));
    let reference = |label: &str| m.iter().find(|x| x.label == label).map(|x| &x.matrix);
    s.flag(
        "hl3_radius_k_independent",
        v.iter().all(|x| reference(&x.label) == Some(&x.matrix)),
    );
    s.le("max_pre_rounding_residual", residual, 0.05);
    Ok(())
}

// ---------------------------------------------------------------- 7

fn c7_closedness(s: &mut Sheet, _seed: u64) -> lagfib_core::Result<()> {
    let model = FibrationModel::focus_focus22();
    let h = DeformationH::parse("b1*b2^2 + exp(b3)*b1 + sin(b2)", 3)?;
    let tau1 = |x: &[f64], reference: Option<&OneFormSample>| -> lagfib_core::Result<OneFormSample> {
        let t = periods::ff22_tau0(x, reference)?;
        let g = h.gradient(&model, x)?;
        Ok(OneFormSample {
            comps: t.comps.iter().zip(&g).map(|(a, b)| a + b).collect(),
            ..t
        })
    };
    let mut ratio_lo = f64::INFINITY;
    let mut ratio_hi: f64 = 0.0;
    for b in [[0.6, 0.4, 0.5], [0.5, -0.7, 0.3], [-0.8, 0.2, 0.7]] {
        let e1 = periods::max_abs_entry(&periods::closedness_residual(tau1, &b, 2e-2)?);
        let e2 = periods::max_abs_entry(&periods::closedness_residual(tau1, &b, 1e-2)?);
        ratio_lo = ratio_lo.min(e1 / e2);
        ratio_hi = ratio_hi.max(e1 / e2);
    }
    s.within("halving_ratio_min", ratio_lo, 3.5, 4.5);
    s.within("halving_ratio_max", ratio_hi, 3.5, 4.5);

    let dh = |x: &[f64], _: Option<&OneFormSample>| -> lagfib_core::Result<OneFormSample> {
        Ok(OneFormSample {
            base: x.to_vec(),
            comps: h.gradient(&model, x)?,
            branch: vec![0; 3],
        })
    };
    let c = periods::closedness_residual(dh, &[0.4, -0.3, 0.5], 1e-5)?;
    s.le("exact_dh_residual", periods::max_abs_entry(&c), 1e-8);
    Ok(())
}

// ---------------------------------------------------------------- 8

fn c8_classification(s: &mut Sheet, _seed: u64) -> lagfib_core::Result<()> {
    let ff = FibrationModel::focus_focus22();
    let shift = DeformationH::parse("0.2*b2 + b1*b3", 3)?;
    let cases = [
        ("same", "b1*b2 + b3^2", "b1*b2 + b3^2", Status::Equivalent),
        ("linear", "0", "b1", Status::NotEquivalent),
        ("flat", "0", "exp(-1/d^2)", Status::Equivalent),
    ];
    let mut symmetric = true;
    let mut shift_invariant = true;
    for (label, h, hp, want) in cases {
        let pair = DeformationPair::parse(h, hp, ff)?;
        let v = classify::equivalence_verdict(&pair);
        s.flag(&format!("{label}_is_{}", want.as_str()), v.status == want);
        if label == "flat" {
            s.le("flat_pullback_residual", v.pullback.as_ref().map_or(f64::INFINITY, |p| p.max), 1e-4);
            s.le("flat_tangency", v.tangency.unwrap_or(f64::INFINITY), 1e-8);
            if let Some(r) = v.ball_radius {
                s.info("flat_ball_radius", r, "isotopy grid radius");
            }
        }
        let rev = classify::equivalence_verdict(&pair.reversed());
        symmetric &= rev.status == v.status;
        let shifted = classify::equivalence_verdict(&pair.shifted(&shift)?);
        shift_invariant &= shifted.status == v.status && pair.shifted(&shift)?.difference() == pair.difference();
    }
    s.flag("symmetry", symmetric);
    s.flag("common_shift_invariance", shift_invariant);
    s.note(CLASSIFICATION_SCOPE);
    Ok(())
}

// ---------------------------------------------------------------- 9

fn c9_special_lagrangian(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    let mut detected = 0usize;
    let total = 100;
    for _ in 0..total {
        let z = PhasePoint::new(in_ball(&mut r, 6, 2.0))?;
        worst = worst.max(models::special_lagrangian_residual(&z));
        // F₁ + 0.2·Re z₁ shifts ∂F₁/∂z̄₁ by 0.1.
        let mut m = models::wirtinger_matrix(&z);
        m[(0, 0)] += Complex::new(0.1, 0.0);
        if models::residual_of_wirtinger(m) > 1e-6 {
            detected += 1;
        }
    }
    s.le("max_residual", worst, 1e-9);
    s.ge("negative_control_detection_rate", detected as f64 / total as f64, 0.9);
    Ok(())
}

// ---------------------------------------------------------------- 10

fn c10_sections(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut r = rng(seed);
    let model = FibrationModel::harvey_lawson(3)?;
    let (mut fib, mut proj, mut inv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for b in base_points(&mut r, 3, 100, 0.0) {
        let plus = model.section(SectionKind::Plus, &b)?;
        let minus = model.section(SectionKind::Minus, &b)?;
        for (sign, z) in [(1.0, &plus), (-1.0, &minus)] {
            fib = fib.max(max_diff(&model.eval_f(z), b.as_slice()));
            let (u, bb) = models::project_pi(z);
            proj = proj.max((u - sign).abs()).max(max_diff(&bb, b.as_slice()));
        }
        inv = inv.max(max_diff(models::involution_a(&minus).coords(), plus.coords()));
    }
    s.le("fibre_error", fib, 1e-10);
    s.le("projection_error", proj, 1e-10);
    s.le("involution_error", inv, 1e-10);
    Ok(())
}

// ---------------------------------------------------------------- 11

/// Expressions that evaluate on `b ∈ [0.5, 1.5]³`, `d ∈ [0.2, 0.8]`.
pub const CORPUS: &[&str] = &[
    "b1", "b1 + b2", "b1 - b2 - b3", "b1*b2/b3", "b1^2", "b1^b2", "2^3^b1", "-b1^2", "-(b1 + b2)",
    "(-b1)^2", "b1*-b2", "b1/-b2*b3", "exp(b1)", "exp(-1/d^2)", "flatbump(d)", "flatbump(b1 - 1)",
    "log(b1 + b2)", "sqrt(b1*b2)", "sin(b1)*cos(b2)", "atan2(b1, b2)", "atan2(b2 - b3, b1)",
    "abs(b1 - 2)", "abs(b1 - b2 + 3)*b3", "pi*b1", "2*pi - b3", "b1^2 + flatbump(d)", "d", "d^2*b1",
    "exp(-1/d^2)*b1", "b1*b2*b3", "(b1 + b2)*(b2 - b3)", "b1 - (b2 - b3)", "b1/(b2/b3)",
    "(b1/b2)/b3", "1/b1 + 1/b2", "sqrt(d)*log(b3)", "sin(cos(b1))", "exp(sin(b2))*b3^3",
    "log(exp(b1))", "b1^0.5", "b2^-1", "b3^(1/3)", "0.25*b1^4 - 3*b2", "1e-3*b1 + 2.5e2*b2",
    "cos(pi*b1)", "atan2(d, b1)", "abs(sin(b1))", "-b1 - -b2", "--b3", "b1^2^0.5", "(b1^2)^0.5",
    "flatbump(d)*sin(b1) + b2", "exp(-1/(b1 - 0.4)^2)", "b1*(b2 + b3*(b1 - b2))", "3 - 2 - 1",
    "8/4/2", "b1 * b2 + b3 * d", "sqrt(b1^2 + b2^2 + b3^2)", "log(d) - log(b1)", "b3/(1 + b1^2)",
    "sin(b1)^2 + cos(b1)^2", "exp(b1 - b2)*d",
];

fn eval_at(e: &Expr, b: &[f64], d: f64) -> lagfib_core::Result<f64> {
    Ok(e.eval(&EvalContext { b, d: Some(d) }, EvalPolicy::Removable)?)
}

/// Argument vectors whose output must be byte-identical across reruns.
pub fn determinism_cases(seed: u64) -> Vec<Vec<String>> {
    let seed = seed.to_string();
    [
        vec!["alpha", "--n", "2", "--b", "1,0"],
        vec!["monodromy", "--family", "ff22", "--radius", "0.5", "--k", "32"],
        vec!["sweep", "--x-range=-1:1:6", "--y-range=-1:1:6", "--at", "0,0,0.5"],
        vec!["sweep", "--random", "24", "--seed", seed.as_str(), "--format", "csv"],
        vec!["discriminant", "--grid", "5", "--format", "csv"],
        vec!["classify", "--H", "0", "--Hp", "b1"],
    ]
    .into_iter()
    .map(|v| std::iter::once("lagfib").chain(v).map(String::from).collect())
    .collect()
}

fn c11_determinism(s: &mut Sheet, seed: u64) -> lagfib_core::Result<()> {
    let mut identical = true;
    for args in determinism_cases(seed) {
        let run = |threads| crate::execute(args.clone(), Some(threads)).map(|o| o.bytes);
        match (run(1), run(4)) {
            (Ok(a), Ok(b)) => identical &= a == b,
            (a, b) => {
                identical = false;
                s.note(format!("{args:?}: {:?} / {:?}", a.err(), b.err()));
            }
        }
    }
    s.flag("byte_identical_reruns", identical);

    let mut round_trip = true;
    let mut exprs = Vec::with_capacity(CORPUS.len());
    for text in CORPUS {
        let e = parse_expr(text)?;
        round_trip &= parse_expr(&e.to_string())? == e;
        exprs.push(e);
    }
    s.ge("corpus_size", CORPUS.len() as f64, 50.0);
    s.flag("parse_print_round_trip", round_trip);

    let mut r = rng(seed);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for e in &exprs {
        let derivs: Vec<(Var, Expr)> = [Var::B(0), Var::B(1), Var::B(2), Var::D].into_iter().map(|v| (v, e.diff(v))).collect();
        for _ in 0..5 {
            let b: Vec<f64> = (0..3).map(|_| r.random_range(0.5..1.5)).collect();
            let d = r.random_range(0.2..0.8);
            for (var, de) in &derivs {
                let analytic = eval_at(de, &b, d)?;
                let (mut bp, mut bm, mut dp, mut dm) = (b.clone(), b.clone(), d, d);
                match var {
                    Var::B(i) => {
                        bp[*i] += h;
                        bm[*i] -= h;
                    }
                    Var::D => {
                        dp += h;
                        dm -= h;
                    }
                }
                let fd = (eval_at(e, &bp, dp)? - eval_at(e, &bm, dm)?) / (2.0 * h);
                worst = worst.max((analytic - fd).abs() / analytic.abs().max(1.0));
            }
        }
    }
    s.le("derivative_vs_fd_rel", worst, 1e-6);
    Ok(())
}
