//! Period 1-forms of the two model families.
//!
//! The singular period `α(b) = −∫_{ζ₀}^{ζ₁} dx/√P_b(x)` of the Harvey–Lawson
//! family is computed twice: by quadrature after the substitution
//! `x = ζ₀ + s²`, and as a flow time of the full Hamiltonian system. The
//! multitime `T(b)` carries a section to the opposite section along the torus
//! action, and `τ₁ = Σ Tᵢ dbᵢ + dH` is the singular element of the period
//! basis. The regular elements are constant.
//!
//! With `ι(v)ω₀ = dF` the reduced flow of `F₁` moves `u = Re ∏zᵢ` upward, so
//! the Harvey–Lawson multitime is solved from `Σ⁺(b)` to `Σ⁻(b)`; its first
//! component is then `α(b) < 0`. The focus-focus multitime runs from `Σ₁` to
//! `Σ₂` and has the closed form `(−log|s| + 2 log ε, Arg s, 0)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{parse_expr, EvalContext, EvalPolicy, Expr, Var};
use crate::fd;
use crate::models::{project_pi, FibrationModel, ModelKind, PhasePoint, SectionKind};
use crate::ode::{self, EventOutcome, OdeOptions};
use crate::poly_geometry::{self, BaseParams};
use crate::quadrature::{self, QuadOptions};

/// A smooth deformation function `H(b)` given as an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationH {
    expr: Expr,
    grad: Vec<Expr>,
    d_partial: Expr,
    n: usize,
    policy: EvalPolicy,
}

impl DeformationH {
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Self::from_expr(parse_expr(text)?, n)
    }

    pub fn from_expr(expr: Expr, n: usize) -> Result<Self> {
        if let Some(k) = expr.max_b_index() {
            if k >= n {
                return Err(Error::InvalidInput(format!(
                    "expression uses b{} but the base has dimension {n}",
                    k + 1
                )));
            }
        }
        let grad = (0..n).map(|i| expr.diff(Var::B(i))).collect();
        let d_partial = expr.diff(Var::D);
        Ok(DeformationH {
            expr,
            grad,
            d_partial,
            n,
            policy: EvalPolicy::Removable,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::from_expr(Expr::Num(0.0), n).expect("constant expression is valid")
    }

    pub fn with_policy(mut self, policy: EvalPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn plus(&self, other: &DeformationH) -> DeformationH {
        Self::from_expr(self.expr.clone() + other.expr.clone(), self.n.max(other.n))
            .expect("sum of valid expressions")
            .with_policy(self.policy)
    }

    pub fn minus(&self, other: &DeformationH) -> DeformationH {
        Self::from_expr(self.expr.clone() - other.expr.clone(), self.n.max(other.n))
            .expect("difference of valid expressions")
            .with_policy(self.policy)
    }

    fn ctx<'a>(&self, model: &FibrationModel, b: &'a [f64]) -> EvalContext<'a> {
        EvalContext {
            b,
            d: Some(model.base_distance(b)),
        }
    }

    pub fn eval(&self, model: &FibrationModel, b: &[f64]) -> Result<f64> {
        Ok(self.expr.eval(&self.ctx(model, b), self.policy)?)
    }

    /// Gradient by symbolic differentiation; the chain-rule factor `∂d/∂bᵢ`
    /// is a central difference.
    pub fn gradient(&self, model: &FibrationModel, b: &[f64]) -> Result<Vec<f64>> {
        let ctx = self.ctx(model, b);
        let mut g = Vec::with_capacity(self.n);
        let dd = if self.expr.uses_d() {
            Some(self.d_partial.eval(&ctx, self.policy)?)
        } else {
            None
        };
        for i in 0..self.n {
            let mut v = self.grad[i].eval(&ctx, self.policy)?;
            if let Some(dd) = dd {
                if dd != 0.0 {
                    let h = 1e-6 * (1.0 + b[i].abs());
                    let mut p = b.to_vec();
                    p[i] = b[i] + h;
                    let dp = model.base_distance(&p);
                    p[i] = b[i] - h;
                    let dm = model.base_distance(&p);
                    v += dd * (dp - dm) / (2.0 * h);
                }
            }
            g.push(v);
        }
        Ok(g)
    }

    pub fn partial(&self, model: &FibrationModel, b: &[f64], i: usize) -> Result<f64> {
        Ok(self.gradient(model, b)?[i])
    }
}

/// A covector `Σ comps[j] db_j` at `base`, with a winding record for each
/// Arg-type component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneFormSample {
    pub base: Vec<f64>,
    pub comps: Vec<f64>,
    pub branch: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiTimeSolution {
    pub t: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodBasis {
    pub tau: Vec<OneFormSample>,
    pub multitime: Vec<f64>,
}

/// Model plus numerical settings shared by all period computations.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodContext {
    pub model: FibrationModel,
    /// Coefficient of `db_k` in the regular period `τ_k`, `k ≥ 2`.
    pub regular_periods: Vec<f64>,
    pub quad: QuadOptions,
    pub ode: OdeOptions,
    pub shoot_tol: f64,
}

impl PeriodContext {
    /// For Harvey–Lawson the regular periods are first-return times of the
    /// circle flows measured at `(1, …, 1)`.
    pub fn new(model: FibrationModel) -> Result<Self> {
        Self::with_options(model, QuadOptions::default(), OdeOptions::default())
    }

    pub fn with_options(model: FibrationModel, quad: QuadOptions, ode: OdeOptions) -> Result<Self> {
        let regular_periods = match model.kind {
            ModelKind::FocusFocus22 => vec![2.0 * PI, 1.0],
            ModelKind::HarveyLawson { n } => {
                let one = PhasePoint::new([1.0, 0.0].repeat(n))?;
                (1..n)
                    .map(|k| model.first_return_time(k, &one, 100.0, &ode))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(PeriodContext {
            model,
            regular_periods,
            quad,
            ode,
            shoot_tol: 1e-10,
        })
    }
}

// ---------------------------------------------------------------- α(b)

/// Coefficients `c_k` (ascending) of `Q(x₀ + y) = Σ c_k y^k`.
fn taylor_shift(desc: &[f64], x0: f64) -> Vec<f64> {
    let mut c = desc.to_vec();
    let mut out = Vec::with_capacity(c.len());
    while !c.is_empty() {
        let mut acc = 0.0;
        let mut q = Vec::with_capacity(c.len());
        for v in &c {
            acc = acc * x0 + v;
            q.push(acc);
        }
        out.push(q.pop().expect("non-empty"));
        c = q;
    }
    out
}

fn check_off_delta(b: &BaseParams) -> Result<(poly_geometry::SpectralPolynomial, f64)> {
    let p = poly_geometry::build_poly(b);
    let z0 = poly_geometry::max_real_root(&p, 0.0)?;
    if p.derivative(z0).abs() <= poly_geometry::default_tol_disc(b) {
        return Err(Error::OnDiscriminant(b.as_slice().to_vec()));
    }
    Ok((p, z0))
}

pub fn alpha_quadrature(b: &BaseParams) -> Result<f64> {
    alpha_quadrature_with(b, &QuadOptions::default()).map(|r| r.0)
}

/// `α(b)` and the number of subintervals used.
pub fn alpha_quadrature_with(b: &BaseParams, opts: &QuadOptions) -> Result<(f64, usize)> {
    let (p, z0) = check_off_delta(b)?;
    let z1 = poly_geometry::max_real_root(&p, 1.0)?;
    let (q, _) = p.deflate(z0);
    let c = taylor_shift(&q, z0);
    if c[0] <= 0.0 {
        return Err(Error::OnDiscriminant(b.as_slice().to_vec()));
    }
    let upper = (z1 - z0).max(0.0).sqrt();
    let integrand = |s: f64| {
        let y = s * s;
        let qv = c.iter().rev().fold(0.0, |acc, v| acc * y + v);
        2.0 / qv.sqrt()
    };
    let (v, pieces) = quadrature::integrate(integrand, 0.0, upper, opts)?;
    Ok((-v, pieces))
}

/// Signed time of the `F₁` flow from `Σ⁺(b)` back to the level `u = −1`.
pub fn alpha_flow_oracle(b: &BaseParams) -> Result<f64> {
    alpha_flow_oracle_with(b, &OdeOptions::default(), 1e3).map(|r| r.0)
}

/// Flow time and the phase point where the event fired.
pub fn alpha_flow_oracle_with(b: &BaseParams, opts: &OdeOptions, t_cap: f64) -> Result<(f64, PhasePoint)> {
    check_off_delta(b)?;
    let model = FibrationModel::harvey_lawson(b.n())?;
    let start = model.section(SectionKind::Plus, b)?;
    let event = |_t: f64, y: &[f64]| {
        let p = PhasePoint::new(y.to_vec()).map(|p| project_pi(&p).0).unwrap_or(f64::NAN);
        p + 1.0
    };
    match ode::integrate_with_event(model.field_fn(0), 0.0, start.coords(), -t_cap, event, opts)? {
        EventOutcome::Hit { t, y } => Ok((t, PhasePoint::new(y)?)),
        EventOutcome::Reached { .. } => Err(Error::EventNotFound(t_cap)),
    }
}

/// `−2/√Q_b(ζ₀)`.
pub fn alpha_bound(b: &BaseParams) -> Result<f64> {
    let (p, z0) = check_off_delta(b)?;
    let (q0, _) = poly_geometry::q_factor_at(&p, z0);
    if q0 <= 0.0 {
        return Err(Error::OnDiscriminant(b.as_slice().to_vec()));
    }
    Ok(-2.0 / q0.sqrt())
}

// ---------------------------------------------------------------- multitime

/// Newton iteration for `Φ(T, start) = target` on the torus action.
pub fn shoot(
    model: &FibrationModel,
    start: &PhasePoint,
    target: &PhasePoint,
    guess: &[f64],
    tol: f64,
) -> Result<MultiTimeSolution> {
    let n = model.n();
    let scale = 1.0 + target.coords().iter().map(|c| c * c).sum::<f64>().sqrt();
    let residual = |t: &[f64]| -> Result<(PhasePoint, Vec<f64>, f64)> {
        let p = model.poisson_action(t, start)?;
        let r = model.phase_difference(&p, target);
        let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok((p, r, nr))
    };
    let mut t = guess.to_vec();
    let (mut p, mut r, mut nr) = residual(&t)?;
    for it in 0..40 {
        if nr <= tol * scale {
            return Ok(MultiTimeSolution {
                t,
                residual: nr,
                iterations: it,
            });
        }
        let cols: Vec<Vec<f64>> = (0..n).map(|i| model.ham_vector_field(i, &p)).collect();
        let j = DMatrix::from_fn(r.len(), n, |row, col| cols[col][row]);
        let jt = j.transpose();
        let rhs = -(&jt * DVector::from_vec(r.clone()));
        let step = (&jt * &j).lu().solve(&rhs).ok_or(Error::ShootingDiverged {
            iterations: it,
            residual: nr,
        })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = t.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let (tp, tr, tn) = residual(&trial)?;
            if tn < nr || lambda < 1.0 / 64.0 {
                if tn >= nr && step.norm() * lambda < 1e-14 * (1.0 + t.iter().map(|v| v.abs()).sum::<f64>()) {
                    // Stalled at the accuracy floor of the flow map.
                    return if nr <= 1e3 * tol * scale {
                        Ok(MultiTimeSolution { t, residual: nr, iterations: it })
                    } else {
                        Err(Error::ShootingDiverged { iterations: it, residual: nr })
                    };
                }
                t = trial;
                p = tp;
                r = tr;
                nr = tn;
                break;
            }
            lambda *= 0.5;
        }
    }
    Err(Error::ShootingDiverged {
        iterations: 40,
        residual: nr,
    })
}

/// The representative of `a + period·ℤ` nearest `reference`.
fn nearest(a: f64, period: f64, reference: f64) -> f64 {
    a + period * ((reference - a) / period).round()
}

/// Multitime primitive at `b`, continued from `warm` when given.
pub fn multitime_solve(ctx: &PeriodContext, b: &BaseParams, warm: Option<&[f64]>) -> Result<MultiTimeSolution> {
    let model = &ctx.model;
    match model.kind {
        ModelKind::FocusFocus22 => {
            let s = nalgebra::Complex::new(b[0], b[1]);
            if s.norm() == 0.0 {
                return Err(Error::OnDiscriminant(b.as_slice().to_vec()));
            }
            let mut arg = s.arg();
            if let Some(w) = warm {
                arg = nearest(arg, 2.0 * PI, w[1]);
            }
            let t = vec![-s.norm().ln() + 2.0 * model.eps.ln(), arg, 0.0];
            let start = model.section(SectionKind::Minus, b)?;
            let target = model.section(SectionKind::Plus, b)?;
            let end = model.poisson_action(&t, &start)?;
            Ok(MultiTimeSolution {
                residual: model.phase_distance(&end, &target),
                t,
                iterations: 0,
            })
        }
        ModelKind::HarveyLawson { n } => {
            let start = model.section(SectionKind::Plus, b)?;
            let target = model.section(SectionKind::Minus, b)?;
            let guess = match warm {
                Some(w) => w.to_vec(),
                None => {
                    let (t1, w) = alpha_flow_oracle_with(b, &ctx.ode, 1e3)?;
                    let mut g = vec![t1];
                    for k in 1..n {
                        g.push(0.5 * (target.z(k) / w.z(k)).arg());
                    }
                    g
                }
            };
            shoot(model, &start, &target, &guess, ctx.shoot_tol)
        }
    }
}

fn winding(t: f64, period: f64) -> i64 {
    (t / period).round() as i64
}

/// Period basis `τ₁ … τₙ` at `b`, continued from `reference` when given.
pub fn period_basis(
    ctx: &PeriodContext,
    h: &DeformationH,
    b: &BaseParams,
    reference: Option<&PeriodBasis>,
) -> Result<PeriodBasis> {
    let n = ctx.model.n();
    let warm = reference.map(|r| r.multitime.as_slice());
    let bs = b.as_slice();
    let sol = multitime_solve(ctx, b, warm)?;
    let (comps0, wind) = match ctx.model.kind {
        ModelKind::FocusFocus22 => {
            let s = nalgebra::Complex::new(b[0], b[1]);
            let arg = sol.t[1];
            let k = ((arg - s.arg()) / (2.0 * PI)).round() as i64;
            (vec![-s.norm().ln(), arg, 0.0], vec![0, k, 0])
        }
        ModelKind::HarveyLawson { .. } => {
            let mut br = vec![0];
            br.extend(sol.t[1..].iter().map(|t| winding(*t, PI)));
            (sol.t.clone(), br)
        }
    };
    let multitime = sol.t;
    let dh = h.gradient(&ctx.model, bs)?;
    let mut tau = Vec::with_capacity(n);
    tau.push(OneFormSample {
        base: bs.to_vec(),
        comps: comps0.iter().zip(&dh).map(|(a, g)| a + g).collect(),
        branch: wind,
    });
    for k in 1..n {
        let mut comps = vec![0.0; n];
        comps[k] = ctx.regular_periods[k - 1];
        tau.push(OneFormSample {
            base: bs.to_vec(),
            comps,
            branch: vec![0; n],
        });
    }
    Ok(PeriodBasis { tau, multitime })
}

/// The focus-focus form `τ₀ = −log|s| ds₁ + Arg(s) ds₂`, with the Arg
/// branch nearest `reference` (principal when `None`).
pub fn ff22_tau0(b: &[f64], reference: Option<&OneFormSample>) -> Result<OneFormSample> {
    let s = nalgebra::Complex::new(b[0], b[1]);
    if s.norm() == 0.0 {
        return Err(Error::OnDiscriminant(b.to_vec()));
    }
    let p = s.arg();
    let arg = match reference {
        Some(r) => nearest(p, 2.0 * PI, r.comps[1]),
        None => p,
    };
    let k = ((arg - p) / (2.0 * PI)).round() as i64;
    Ok(OneFormSample {
        base: b.to_vec(),
        comps: vec![-s.norm().ln(), arg, 0.0],
        branch: vec![0, k, 0],
    })
}

/// Antisymmetric matrix of central differences `∂ᵢτⱼ − ∂ⱼτᵢ`.
///
/// `form` receives the centre sample as branch reference for every stencil
/// point; a winding mismatch anywhere in the stencil is a `BranchCrossing`.
pub fn closedness_residual<F>(mut form: F, b: &[f64], h: f64) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64], Option<&OneFormSample>) -> Result<OneFormSample>,
{
    let n = b.len();
    let centre = form(b, None)?;
    let mut deriv = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut p = b.to_vec();
        p[i] = b[i] + h;
        let fp = form(&p, Some(&centre))?;
        p[i] = b[i] - h;
        let fm = form(&p, Some(&centre))?;
        if fp.branch != centre.branch || fm.branch != centre.branch {
            return Err(Error::BranchCrossing);
        }
        for j in 0..n {
            deriv[i][j] = (fp.comps[j] - fm.comps[j]) / (2.0 * h);
        }
    }
    Ok((0..n)
        .map(|i| (0..n).map(|j| deriv[i][j] - deriv[j][i]).collect())
        .collect())
}

pub fn max_abs_entry(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0, |a, v| a.max(v.abs()))
}

// ---------------------------------------------------------------- asymptotics

/// Least-squares line through `(ln x, ln |y|)`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<AsymptoticFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && y.is_finite() && **y != 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientSamples(format!("{} usable points", pts.len())));
    }
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-3 {
        return Err(Error::InsufficientSamples(
            "distance does not vary along the path".into(),
        ));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(AsymptoticFit {
        slope,
        intercept: my - slope * mx,
        r2,
        window: (lo.exp(), hi.exp()),
        samples: pts.len(),
    })
}

/// `count` logarithmically spaced values in `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Fit of `ln|α(b(t))|` against `ln dist(b(t), Δ)` over `t ∈ window`.
pub fn blowup_fit<P>(path: P, window: (f64, f64), samples: usize) -> Result<AsymptoticFit>
where
    P: Fn(f64) -> Vec<f64>,
{
    blowup_fit_of(path, window, samples, |b| alpha_quadrature(b))
}

/// As [`blowup_fit`] for an arbitrary function of the base point.
pub fn blowup_fit_of<P, G>(path: P, window: (f64, f64), samples: usize, g: G) -> Result<AsymptoticFit>
where
    P: Fn(f64) -> Vec<f64>,
    G: Fn(&BaseParams) -> Result<f64>,
{
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::InvalidInput(format!("bad window {window:?}")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for t in log_space(window.0, window.1, samples) {
        let b = BaseParams::new(path(t))?;
        if let Ok(v) = g(&b) {
            xs.push(poly_geometry::dist_to_discriminant(&b));
            ys.push(v);
        }
    }
    fit_loglog(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalRow {
    pub t: f64,
    pub dist: f64,
    pub index: Vec<usize>,
    pub product: f64,
}

/// `φ(b)·∂_Jα(b)` along a path, for every `|J| ≤ k_max`.
///
/// Derivatives of `α` are nested central differences with step `0.1·d`.
pub fn rational_type_check<P>(
    k_max: usize,
    phi: &DeformationH,
    path: P,
    ts: &[f64],
) -> Result<Vec<RationalRow>>
where
    P: Fn(f64) -> Vec<f64>,
{
    let mut rows = Vec::new();
    for &t in ts {
        let b = path(t);
        let n = b.len();
        let model = FibrationModel::harvey_lawson(n)?;
        let d = model.base_distance(&b);
        let phi_v = phi.eval(&model, &b)?;
        let alpha = |x: &[f64]| alpha_quadrature(&BaseParams::from_slice(x)?);
        for index in fd::multi_indices(n, k_max) {
            let product = if phi_v == 0.0 {
                0.0
            } else {
                phi_v * fd::mixed_partial(&alpha, &b, &index, 0.1 * d)?
            };
            rows.push(RationalRow {
                t,
                dist: d,
                index,
                product,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(v: &[f64]) -> BaseParams {
        BaseParams::from_slice(v).unwrap()
    }

    #[test]
    fn closed_form_two_dim() {
        let b = bp(&[1.0, 0.0]);
        let want = -(1.0 + 2f64.sqrt()).ln();
        assert!((alpha_quadrature(&b).unwrap() - want).abs() < 1e-12);
        assert!((alpha_flow_oracle(&b).unwrap() - want).abs() < 1e-6);
        assert!((alpha_bound(&b).unwrap() + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oracles_agree_three_dim() {
        let b = bp(&[1.0, 0.0, 0.0]);
        let q = alpha_quadrature(&b).unwrap();
        let f = alpha_flow_oracle(&b).unwrap();
        assert!(((q - f) / q).abs() < 1e-5, "{q} {f}");
        assert!(q < 0.0);
    }

    #[test]
    fn on_delta_is_rejected() {
        let b = bp(&[0.0, 1.0, 1.0]);
        assert!(matches!(alpha_quadrature(&b), Err(Error::OnDiscriminant(_))));
        assert!(matches!(alpha_bound(&b), Err(Error::OnDiscriminant(_))));
        assert!(matches!(alpha_flow_oracle(&b), Err(Error::OnDiscriminant(_))));
    }

    #[test]
    fn ff22_multitime_examples() {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let e = ctx.model.eps;
        let t = multitime_solve(&ctx, &bp(&[e * e, 0.0, 0.4]), None).unwrap();
        assert!(t.t.iter().all(|v| v.abs() < 1e-15));
        assert!(t.residual < 1e-14);
        let t = multitime_solve(&ctx, &bp(&[0.0, e * e, 0.4]), None).unwrap();
        assert!(t.t[0].abs() < 1e-15 && (t.t[1] - PI / 2.0).abs() < 1e-15);
        assert!(t.residual < 1e-14);
    }

    #[test]
    fn hl_multitime_hits_section() {
        let ctx = PeriodContext::new(FibrationModel::harvey_lawson(3).unwrap()).unwrap();
        let b = bp(&[1.0, 0.0, 0.0]);
        let sol = multitime_solve(&ctx, &b, None).unwrap();
        assert!(sol.residual < 1e-8);
        let q = alpha_quadrature(&b).unwrap();
        assert!(((sol.t[0] - q) / q).abs() < 1e-6);
        for p in &ctx.regular_periods {
            assert!((p - PI).abs() < 1e-9);
        }
    }

    #[test]
    fn ff22_basis_examples() {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let zero = DeformationH::zero(3);
        let basis = period_basis(&ctx, &zero, &bp(&[1.0, 0.0, 0.3]), None).unwrap();
        assert!(basis.tau[0].comps.iter().all(|v| v.abs() < 1e-15));
        assert_eq!(basis.tau[1].comps, vec![0.0, 2.0 * PI, 0.0]);
        assert_eq!(basis.tau[2].comps, vec![0.0, 0.0, 1.0]);
        let h = DeformationH::parse("b1", 3).unwrap();
        let basis = period_basis(&ctx, &h, &bp(&[1.0, 0.0, 0.3]), None).unwrap();
        assert!((basis.tau[0].comps[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ff22_tau0_is_closed_and_detects_cut() {
        let form = |b: &[f64], r: Option<&OneFormSample>| ff22_tau0(b, r);
        let c = closedness_residual(form, &[1.0, 0.5, 0.5], 1e-3).unwrap();
        assert!(max_abs_entry(&c) < 1e-5);
        let crossing = closedness_residual(form, &[-0.5, 1e-4, 0.5], 1e-3);
        assert_eq!(crossing, Err(Error::BranchCrossing));
    }

    #[test]
    fn taylor_shift_matches_direct() {
        let q = [1.0, -2.0, 0.5];
        let c = taylor_shift(&q, 0.7);
        for y in [0.0, 0.3, 1.2] {
            let direct = (0.7f64 + y).powi(2) - 2.0 * (0.7 + y) + 0.5;
            let shifted = c[0] + c[1] * y + c[2] * y * y;
            assert!((direct - shifted).abs() < 1e-14);
        }
    }

    #[test]
    fn fit_requires_spread() {
        let r = blowup_fit(|_t| vec![0.5, 0.3, 0.2], (1e-3, 1e-1), 8);
        assert!(matches!(r, Err(Error::InsufficientSamples(_))));
    }
}
