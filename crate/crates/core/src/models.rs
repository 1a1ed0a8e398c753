//! Total-space models: the Harvey–Lawson map on ℂⁿ and the focus-focus×S¹
//! normal form.
//!
//! Phase points are stored as interleaved canonical pairs
//! `(x₁, y₁, x₂, y₂, …)` with `ω₀ = Σ dxᵢ∧dyᵢ`. For the focus-focus model the
//! chart is `(x₁, y₁, x₂, y₂, r, θ)`, with `ζ₁ = x₁ + i·x₂`, `ζ₂ = y₁ + i·y₂`
//! and `θ` read mod 1. Hamiltonian fields satisfy `ι(v)ω₀ = dF`, i.e.
//! `v_x = ∂F/∂y` and `v_y = −∂F/∂x`.
//!
//! Component indices are zero-based throughout: `F_1` of the usual notation
//! is index 0.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, EventOutcome, OdeOptions};
use crate::poly_geometry::{self, BaseParams};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePoint {
    coords: Vec<f64>,
}

impl PhasePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || !coords.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "phase point needs an even number of reals, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite phase point".into()));
        }
        Ok(PhasePoint { coords })
    }

    pub fn from_complex(z: &[C64]) -> Self {
        PhasePoint {
            coords: z.iter().flat_map(|w| [w.re, w.im]).collect(),
        }
    }

    /// Focus-focus chart point from `(ζ₁, ζ₂, r, θ)`.
    pub fn from_zetas(zeta1: C64, zeta2: C64, r: f64, theta: f64) -> Self {
        PhasePoint {
            coords: vec![zeta1.re, zeta2.re, zeta1.im, zeta2.im, r, theta],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `x_k + i·y_k`.
    pub fn z(&self, k: usize) -> C64 {
        C64::new(self.coords[2 * k], self.coords[2 * k + 1])
    }

    pub fn to_complex(&self) -> Vec<C64> {
        (0..self.coords.len() / 2).map(|k| self.z(k)).collect()
    }

    pub fn zeta1(&self) -> C64 {
        C64::new(self.coords[0], self.coords[2])
    }

    pub fn zeta2(&self) -> C64 {
        C64::new(self.coords[1], self.coords[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelKind {
    HarveyLawson { n: usize },
    FocusFocus22,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SectionKind {
    Plus,
    Minus,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FibrationModel {
    pub kind: ModelKind,
    /// Section placement parameter of the focus-focus model.
    pub eps: f64,
    /// Angle of the focus-focus sections.
    pub theta0: f64,
}

impl FibrationModel {
    pub fn harvey_lawson(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("Harvey–Lawson needs n ≥ 2, got {n}")));
        }
        Ok(FibrationModel {
            kind: ModelKind::HarveyLawson { n },
            eps: 0.5,
            theta0: 0.0,
        })
    }

    pub fn focus_focus22() -> Self {
        FibrationModel {
            kind: ModelKind::FocusFocus22,
            eps: 0.5,
            theta0: 0.0,
        }
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn is_hl(&self) -> bool {
        matches!(self.kind, ModelKind::HarveyLawson { .. })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::HarveyLawson { .. } => "hl",
            ModelKind::FocusFocus22 => "ff22",
        }
    }

    /// Base dimension.
    pub fn n(&self) -> usize {
        match self.kind {
            ModelKind::HarveyLawson { n } => n,
            ModelKind::FocusFocus22 => 3,
        }
    }

    pub fn phase_dim(&self) -> usize {
        2 * self.n()
    }

    /// Distance from a base point to the discriminant of this model: `|s|`
    /// for the focus-focus chart, [`poly_geometry::dist_to_discriminant`]
    /// for Harvey–Lawson.
    pub fn base_distance(&self, b: &[f64]) -> f64 {
        match self.kind {
            ModelKind::FocusFocus22 => b[0].hypot(b[1]),
            ModelKind::HarveyLawson { .. } => match BaseParams::from_slice(b) {
                Ok(bp) => poly_geometry::dist_to_discriminant(&bp),
                Err(_) => f64::NAN,
            },
        }
    }

    pub fn validate(&self, z: &PhasePoint) -> Result<()> {
        if z.dim() != self.phase_dim() {
            return Err(Error::InvalidInput(format!(
                "phase point has {} reals, model needs {}",
                z.dim(),
                self.phase_dim()
            )));
        }
        if self.kind == ModelKind::FocusFocus22 {
            let r = z.coords[4];
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidInput(format!("chart requires r ∈ (0,1), got {r}")));
            }
        }
        Ok(())
    }

    pub fn eval_f(&self, z: &PhasePoint) -> Vec<f64> {
        let c = &z.coords;
        match self.kind {
            ModelKind::HarveyLawson { n } => {
                let zs = z.to_complex();
                let prod = zs.iter().fold(C64::new(1.0, 0.0), |a, w| a * w);
                let m1 = zs[0].norm_sqr();
                let mut out = Vec::with_capacity(n);
                out.push(prod.im);
                out.extend(zs[1..].iter().map(|w| m1 - w.norm_sqr()));
                out
            }
            ModelKind::FocusFocus22 => {
                let (x1, y1, x2, y2, r) = (c[0], c[1], c[2], c[3], c[4]);
                vec![x1 * y1 + x2 * y2, x1 * y2 - x2 * y1, r]
            }
        }
    }

    pub fn eval_base(&self, z: &PhasePoint) -> Result<BaseParams> {
        BaseParams::new(self.eval_f(z))
    }

    /// `dF_i` as `(∂/∂x₁, ∂/∂y₁, ∂/∂x₂, …)`.
    pub fn gradient(&self, i: usize, z: &PhasePoint) -> Vec<f64> {
        let c = &z.coords;
        let mut g = vec![0.0; c.len()];
        match self.kind {
            ModelKind::HarveyLawson { n } => {
                if i == 0 {
                    let zs = z.to_complex();
                    for k in 0..n {
                        let others = zs
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != k)
                            .fold(C64::new(1.0, 0.0), |a, (_, w)| a * w);
                        g[2 * k] = others.im;
                        g[2 * k + 1] = others.re;
                    }
                } else {
                    g[0] = 2.0 * c[0];
                    g[1] = 2.0 * c[1];
                    g[2 * i] = -2.0 * c[2 * i];
                    g[2 * i + 1] = -2.0 * c[2 * i + 1];
                }
            }
            ModelKind::FocusFocus22 => {
                let (x1, y1, x2, y2) = (c[0], c[1], c[2], c[3]);
                match i {
                    0 => {
                        g[0] = y1;
                        g[1] = x1;
                        g[2] = y2;
                        g[3] = x2;
                    }
                    1 => {
                        g[0] = y2;
                        g[1] = -x2;
                        g[2] = -y1;
                        g[3] = x1;
                    }
                    _ => g[4] = 1.0,
                }
            }
        }
        g
    }

    pub fn ham_vector_field(&self, i: usize, z: &PhasePoint) -> Vec<f64> {
        vector_field_from_gradient(&self.gradient(i, z))
    }

    pub fn poisson_bracket(&self, i: usize, j: usize, z: &PhasePoint) -> f64 {
        omega0(&self.ham_vector_field(i, z), &self.ham_vector_field(j, z))
    }

    pub fn has_closed_flow(&self, i: usize) -> bool {
        !(self.is_hl() && i == 0)
    }

    pub fn flow_closed(&self, i: usize, t: f64, z: &PhasePoint) -> Option<PhasePoint> {
        let mut c = z.coords.clone();
        match self.kind {
            ModelKind::HarveyLawson { .. } => {
                if i == 0 {
                    return None;
                }
                rotate_pair(&mut c, 0, -2.0 * t);
                rotate_pair(&mut c, i, 2.0 * t);
            }
            ModelKind::FocusFocus22 => match i {
                0 => {
                    let (e, ei) = (t.exp(), (-t).exp());
                    c[0] *= e;
                    c[2] *= e;
                    c[1] *= ei;
                    c[3] *= ei;
                }
                1 => {
                    let rot = C64::from_polar(1.0, t);
                    let z1 = rot * z.zeta1();
                    let z2 = rot * z.zeta2();
                    c[0] = z1.re;
                    c[2] = z1.im;
                    c[1] = z2.re;
                    c[3] = z2.im;
                }
                _ => c[5] -= t,
            },
        }
        Some(PhasePoint { coords: c })
    }

    pub fn flow_ode(&self, i: usize, t: f64, z: &PhasePoint, opts: &OdeOptions) -> Result<PhasePoint> {
        let y = ode::integrate(self.field_fn(i), 0.0, &z.coords, t, opts)?;
        Ok(PhasePoint { coords: y })
    }

    /// Closed form where one exists, adaptive integration otherwise.
    pub fn flow(&self, i: usize, t: f64, z: &PhasePoint) -> Result<PhasePoint> {
        match self.flow_closed(i, t, z) {
            Some(p) => Ok(p),
            None => self.flow_ode(i, t, z, &OdeOptions::default()),
        }
    }

    pub fn field_fn(&self, i: usize) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
        move |_t, y, dy| {
            let p = PhasePoint { coords: y.to_vec() };
            let v = self.ham_vector_field(i, &p);
            dy.copy_from_slice(&v);
        }
    }

    /// `φ₁^{t₁}∘⋯∘φₙ^{tₙ}(z)`: the last flow is applied first.
    pub fn poisson_action(&self, t: &[f64], z: &PhasePoint) -> Result<PhasePoint> {
        let order: Vec<usize> = (0..self.n()).rev().collect();
        self.poisson_action_ordered(t, z, &order)
    }

    /// Composition applying the flows in the listed order.
    pub fn poisson_action_ordered(&self, t: &[f64], z: &PhasePoint, order: &[usize]) -> Result<PhasePoint> {
        if t.len() != self.n() {
            return Err(Error::InvalidInput(format!(
                "multitime has {} entries, model needs {}",
                t.len(),
                self.n()
            )));
        }
        let mut p = z.clone();
        for &i in order {
            if t[i] != 0.0 {
                p = self.flow(i, t[i], &p)?;
            }
        }
        Ok(p)
    }

    pub fn section(&self, which: SectionKind, b: &BaseParams) -> Result<PhasePoint> {
        if b.n() != self.n() {
            return Err(Error::InvalidInput(format!(
                "base point has dimension {}, model needs {}",
                b.n(),
                self.n()
            )));
        }
        match self.kind {
            ModelKind::HarveyLawson { .. } => hl_section(which, b),
            ModelKind::FocusFocus22 => {
                let s = C64::new(b[0], b[1]);
                let e = C64::new(self.eps, 0.0);
                let (z1, z2) = match which {
                    SectionKind::Minus => (s.conj() / self.eps, e),
                    SectionKind::Plus => (e, s / self.eps),
                    SectionKind::Zero => {
                        return Err(Error::InvalidInput(
                            "the focus-focus model has no zero section".into(),
                        ))
                    }
                };
                let p = PhasePoint::from_zetas(z1, z2, b[2], self.theta0);
                self.validate(&p)?;
                Ok(p)
            }
        }
    }

    /// Euclidean distance in the chart, with `θ` compared mod 1 for the
    /// focus-focus model.
    pub fn phase_distance(&self, a: &PhasePoint, b: &PhasePoint) -> f64 {
        self.phase_difference(a, b).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    pub fn phase_difference(&self, a: &PhasePoint, b: &PhasePoint) -> Vec<f64> {
        let mut d: Vec<f64> = a.coords.iter().zip(&b.coords).map(|(x, y)| x - y).collect();
        if self.kind == ModelKind::FocusFocus22 {
            d[5] -= d[5].round();
        }
        d
    }

    /// First positive time at which the flow of `F_i` returns to `z`.
    ///
    /// Integrates the flow and stops where `⟨φᵗ(z) − z, v(φᵗ(z))⟩` turns from
    /// negative to positive with the orbit back at its start.
    pub fn first_return_time(&self, i: usize, z: &PhasePoint, t_max: f64, opts: &OdeOptions) -> Result<f64> {
        let opts = &opts.with_h_max(opts.h_max.min(0.05));
        let z0 = z.clone();
        let scale = 1.0 + z0.coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut t_start = 0.0;
        let mut y = z0.coords.clone();
        // Skip the trivial zero at t = 0.
        let kick = 1e-3;
        y = ode::integrate(self.field_fn(i), 0.0, &y, kick, opts)?;
        t_start += kick;
        loop {
            let event = |_t: f64, y: &[f64]| {
                let p = PhasePoint { coords: y.to_vec() };
                let d = self.phase_difference(&p, &z0);
                let v = self.ham_vector_field(i, &p);
                -d.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            };
            match ode::integrate_with_event(self.field_fn(i), t_start, &y, t_max, event, opts)? {
                EventOutcome::Hit { t, y: yh } => {
                    let p = PhasePoint { coords: yh.clone() };
                    if self.phase_distance(&p, &z0) <= 1e-6 * scale {
                        return Ok(t);
                    }
                    let t_next = t + kick;
                    y = ode::integrate(self.field_fn(i), t, &yh, t_next, opts)?;
                    t_start = t_next;
                }
                EventOutcome::Reached { .. } => return Err(Error::EventNotFound(t_max)),
            }
        }
    }
}

fn rotate_pair(c: &mut [f64], k: usize, angle: f64) {
    let w = C64::new(c[2 * k], c[2 * k + 1]) * C64::from_polar(1.0, angle);
    c[2 * k] = w.re;
    c[2 * k + 1] = w.im;
}

/// Hamiltonian vector field of a function with the given gradient.
pub fn vector_field_from_gradient(g: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; g.len()];
    for k in 0..g.len() / 2 {
        v[2 * k] = g[2 * k + 1];
        v[2 * k + 1] = -g[2 * k];
    }
    v
}

/// `ω₀(u, v) = Σ (u_x v_y − u_y v_x)`.
pub fn omega0(u: &[f64], v: &[f64]) -> f64 {
    (0..u.len() / 2)
        .map(|k| u[2 * k] * v[2 * k + 1] - u[2 * k + 1] * v[2 * k])
        .sum()
}

/// Bracket of two functions given by their gradients.
pub fn bracket_from_gradients(df: &[f64], dg: &[f64]) -> f64 {
    omega0(&vector_field_from_gradient(df), &vector_field_from_gradient(dg))
}

fn hl_section(which: SectionKind, b: &BaseParams) -> Result<PhasePoint> {
    let bs = b.as_slice();
    let p = poly_geometry::build_poly(b);
    let (zeta, theta) = match which {
        SectionKind::Plus => (poly_geometry::max_real_root(&p, 1.0)?, bs[0].atan2(1.0)),
        SectionKind::Minus => (poly_geometry::max_real_root(&p, 1.0)?, bs[0].atan2(-1.0)),
        SectionKind::Zero => (poly_geometry::max_real_root(&p, 0.0)?, bs[0].atan2(0.0)),
    };
    let mut z = Vec::with_capacity(bs.len());
    z.push(C64::from_polar(zeta.max(0.0).sqrt(), theta));
    z.extend(bs[1..].iter().map(|bj| C64::new((zeta - bj).max(0.0).sqrt(), 0.0)));
    Ok(PhasePoint::from_complex(&z))
}

/// `(u, b)` with `∏zᵢ = u + i·b₁` and `b = F(z)`.
pub fn project_pi(z: &PhasePoint) -> (f64, Vec<f64>) {
    let zs = z.to_complex();
    let prod = zs.iter().fold(C64::new(1.0, 0.0), |a, w| a * w);
    let m1 = zs[0].norm_sqr();
    let mut b = vec![prod.im];
    b.extend(zs[1..].iter().map(|w| m1 - w.norm_sqr()));
    (prod.re, b)
}

/// Matrix of Wirtinger derivatives `∂F_i/∂z̄_j` of the Harvey–Lawson map.
pub fn wirtinger_matrix(z: &PhasePoint) -> DMatrix<C64> {
    let zs = z.to_complex();
    let n = zs.len();
    let half_i = C64::new(0.0, 0.5);
    DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            half_i
                * zs.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .fold(C64::new(1.0, 0.0), |a, (_, w)| a * w.conj())
        } else if j == 0 {
            zs[0]
        } else if j == i {
            -zs[i]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn residual_of_wirtinger(m: DMatrix<C64>) -> f64 {
    m.determinant().re.abs()
}

/// `|Re det(∂F_i/∂z̄_j)|`.
pub fn special_lagrangian_residual(z: &PhasePoint) -> f64 {
    residual_of_wirtinger(wirtinger_matrix(z))
}

/// `A(z) = (−z̄₁, z₂, …, zₙ)`.
pub fn involution_a(z: &PhasePoint) -> PhasePoint {
    let mut c = z.coords.clone();
    c[0] = -c[0];
    PhasePoint { coords: c }
}

/// Distance to `Crit(F) = ⋃_{i<j} {zᵢ = zⱼ = 0}`.
pub fn critical_distance(z: &PhasePoint) -> f64 {
    let m: Vec<f64> = z.to_complex().iter().map(|w| w.norm_sqr()).collect();
    let mut best = f64::INFINITY;
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            best = best.min((m[i] + m[j]).sqrt());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let hl = FibrationModel::harvey_lawson(3).unwrap();
        let one = PhasePoint::from_complex(&[c(1.0, 0.0); 3]);
        assert_eq!(hl.eval_f(&one), vec![0.0, 0.0, 0.0]);
        let p = PhasePoint::from_complex(&[c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(hl.eval_f(&p), vec![1.0, 0.0, 0.0]);
        let ff = FibrationModel::focus_focus22();
        let q = PhasePoint::from_zetas(c(1.0, 0.0), c(2.0, 0.0), 0.5, 0.0);
        assert_eq!(ff.eval_f(&q), vec![2.0, 0.0, 0.5]);
        let q = PhasePoint::from_zetas(c(0.3, -0.7), c(1.1, 0.4), 0.5, 0.0);
        let prod = q.zeta1().conj() * q.zeta2();
        let f = ff.eval_f(&q);
        assert!((f[0] - prod.re).abs() < 1e-15 && (f[1] - prod.im).abs() < 1e-15);
    }

    #[test]
    fn hl_rotation_field() {
        let hl = FibrationModel::harvey_lawson(3).unwrap();
        let one = PhasePoint::from_complex(&[c(1.0, 0.0); 3]);
        let v = hl.ham_vector_field(1, &one);
        // z₁' = −2i z₁, z₂' = +2i z₂
        assert_eq!(v, vec![0.0, -2.0, 0.0, 2.0, 0.0, 0.0]);
        let back = hl.flow_closed(1, PI, &one).unwrap();
        assert!(hl.phase_distance(&back, &one) < 1e-14);
    }

    #[test]
    fn ff22_theta_field_and_flows() {
        let ff = FibrationModel::focus_focus22();
        let p = PhasePoint::from_zetas(c(1.0, 0.0), c(1.0, 0.0), 0.4, 0.25);
        assert_eq!(ff.ham_vector_field(2, &p), vec![0.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let q = ff.flow(0, 1.0, &p).unwrap();
        assert!((q.zeta1() - c(1f64.exp(), 0.0)).norm() < 1e-15);
        assert!((q.zeta2() - c((-1f64).exp(), 0.0)).norm() < 1e-15);
        let q = ff.poisson_action(&[2f64.ln(), 0.0, 0.0], &p).unwrap();
        assert!((q.zeta1() - c(2.0, 0.0)).norm() < 1e-14 && (q.zeta2() - c(0.5, 0.0)).norm() < 1e-14);
        assert_eq!(ff.flow(1, 0.0, &p).unwrap(), p);
    }

    #[test]
    fn canonical_pair_bracket() {
        let v = bracket_from_gradients(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(v, 1.0);
    }

    #[test]
    fn sections_examples() {
        let hl = FibrationModel::harvey_lawson(3).unwrap();
        let b0 = BaseParams::new(vec![0.0, 0.0, 0.0]).unwrap();
        let s = hl.section(SectionKind::Plus, &b0).unwrap();
        let one = PhasePoint::from_complex(&[c(1.0, 0.0); 3]);
        assert!(hl.phase_distance(&s, &one) < 1e-14);
        let b = BaseParams::new(vec![0.7, -0.3, 0.4]).unwrap();
        let m = hl.section(SectionKind::Minus, &b).unwrap();
        assert!((project_pi(&m).0 + 1.0).abs() < 1e-12);
        let z0 = hl.section(SectionKind::Zero, &b).unwrap();
        let (u, fb) = project_pi(&z0);
        assert!(u.abs() < 1e-10 && (fb[0] - 0.7).abs() < 1e-10);
        let ff = FibrationModel::focus_focus22();
        let e = ff.eps;
        let s1 = ff
            .section(SectionKind::Minus, &BaseParams::new(vec![e * e, 0.0, 0.3]).unwrap())
            .unwrap();
        assert!((s1.zeta1() - c(e, 0.0)).norm() < 1e-15 && (s1.zeta2() - c(e, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sl_and_involution() {
        let one = PhasePoint::from_complex(&[c(1.0, 0.0); 3]);
        assert!(special_lagrangian_residual(&one) < 1e-15);
        let mut m = wirtinger_matrix(&one);
        m[(0, 0)] += c(0.5, 0.0);
        assert!(residual_of_wirtinger(m) > 0.1);
        let z = PhasePoint::from_complex(&[c(0.2, -1.1), c(0.5, 0.3), c(-0.8, 0.6)]);
        assert_eq!(involution_a(&involution_a(&z)), z);
        assert_eq!(critical_distance(&PhasePoint::from_complex(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])), 0.0);
        assert!((critical_distance(&one) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(critical_distance(&PhasePoint::from_complex(&[c(0.0, 0.0); 3])), 0.0);
    }

    #[test]
    fn return_times() {
        let opts = OdeOptions::default();
        let hl = FibrationModel::harvey_lawson(3).unwrap();
        let one = PhasePoint::from_complex(&[c(1.0, 0.0); 3]);
        let t = hl.first_return_time(1, &one, 20.0, &opts).unwrap();
        assert!((t - PI).abs() < 1e-9, "{t}");
        let ff = FibrationModel::focus_focus22();
        let p = PhasePoint::from_zetas(c(0.3, 0.1), c(0.2, -0.4), 0.5, 0.2);
        let t2 = ff.first_return_time(1, &p, 20.0, &opts).unwrap();
        assert!((t2 - 2.0 * PI).abs() < 1e-9, "{t2}");
        let t3 = ff.first_return_time(2, &p, 20.0, &opts).unwrap();
        assert!((t3 - 1.0).abs() < 1e-9, "{t3}");
    }
}
