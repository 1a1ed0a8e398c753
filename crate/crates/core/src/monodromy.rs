//! Monodromy of the period lattice.
//!
//! A period basis is continued around a closed loop in `B∖Δ` by warm-started
//! multitime solves; at closure the final basis is written in terms of the
//! initial one and rounded to an integer matrix. Column `j` of a matrix holds
//! the coordinates of the continued `τ_j` in the initial basis.
//!
//! Harvey–Lawson matrices are reported in the basis `(τ₁, τ₂, −τ₃)`, see
//! [`normalize`].

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{FibrationModel, ModelKind};
use crate::periods::{period_basis, DeformationH, PeriodBasis, PeriodContext};
use crate::poly_geometry::{BaseParams, LEG_DIRECTIONS};

pub const DEFAULT_LOOP_MARGIN: f64 = 0.05;
/// Largest allowed distance of an unrounded entry from its integer.
pub const ROUNDING_TOL: f64 = 0.1;
const MAX_SUBDIVISION: usize = 8;
/// Largest accepted change of an angular multitime component per step.
const MAX_PHASE_JUMP: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntMatrix(pub Vec<Vec<i64>>);

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        IntMatrix((0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect())
    }

    pub fn from_rows<const N: usize>(rows: [[i64; N]; N]) -> Self {
        IntMatrix(rows.iter().map(|r| r.to_vec()).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n();
        IntMatrix(
            (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| self.0[i][k] * other.0[k][j]).sum()).collect())
                .collect(),
        )
    }

    /// Fraction-free determinant (Bareiss).
    pub fn det(&self) -> i64 {
        let n = self.n();
        let mut a: Vec<Vec<i128>> = self.0.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
        let mut sign = 1;
        let mut prev: i128 = 1;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]) as i64
    }

    /// Inverse of a unimodular matrix.
    pub fn inverse(&self) -> Option<IntMatrix> {
        let d = self.det();
        if d.abs() != 1 {
            return None;
        }
        let n = self.n();
        let m = DMatrix::from_fn(n, n, |i, j| self.0[i][j] as f64);
        let inv = m.try_inverse()?;
        Some(IntMatrix((0..n).map(|i| (0..n).map(|j| inv[(i, j)].round() as i64).collect()).collect()))
    }

    /// `(M − I)^k = 0`.
    pub fn is_unipotent_of_order(&self, k: usize) -> bool {
        let n = self.n();
        let mut n_minus = self.clone();
        for i in 0..n {
            n_minus.0[i][i] -= 1;
        }
        let mut p = IntMatrix::identity(n);
        for _ in 0..k {
            p = p.mul(&n_minus);
        }
        p.0.iter().all(|r| r.iter().all(|&v| v == 0))
    }

    pub fn is_unipotent(&self) -> bool {
        self.is_unipotent_of_order(self.n())
    }

    /// Conjugation by `diag(signs)`.
    pub fn conjugate_by_signs(&self, signs: &[i64]) -> IntMatrix {
        let n = self.n();
        IntMatrix((0..n).map(|i| (0..n).map(|j| signs[i] * self.0[i][j] * signs[j]).collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyMatrix {
    pub entries: IntMatrix,
    /// Largest distance of an unrounded entry from its integer.
    pub residual: f64,
    /// Unrounded return map.
    pub raw: Vec<Vec<f64>>,
}

/// A closed polygon in the base; the first point is repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopSpec {
    pub points: Vec<Vec<f64>>,
    pub label: String,
}

impl LoopSpec {
    pub fn new(points: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidInput("a loop needs at least three distinct points".into()));
        }
        if points.first() != points.last() {
            return Err(Error::InvalidInput("loop is not closed".into()));
        }
        Ok(LoopSpec {
            points,
            label: label.into(),
        })
    }

    /// `centre + radius(cos φ·u + sin φ·v)` at `k` equally spaced angles,
    /// counterclockwise about `u × v`.
    pub fn circle(label: impl Into<String>, centre: &[f64], u: &[f64], v: &[f64], radius: f64, k: usize) -> Result<Self> {
        if k < 3 || !(radius > 0.0) {
            return Err(Error::InvalidInput(format!("circle needs k ≥ 3 and radius > 0, got k={k}, radius={radius}")));
        }
        let mut points: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let phi = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                let (s, c) = phi.sin_cos();
                centre
                    .iter()
                    .zip(u.iter().zip(v))
                    .map(|(o, (a, b))| o + radius * (c * a + s * b))
                    .collect()
            })
            .collect();
        points.push(points[0].clone());
        LoopSpec::new(points, label)
    }

    /// `|s| = radius` in the focus-focus base, at fixed `r`.
    pub fn ff22_circle(radius: f64, r: f64, k: usize) -> Result<Self> {
        Self::circle("ff22-circle", &[0.0, 0.0, r], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], radius, k)
    }

    /// Circle in the normal plane of leg `leg` (0, 1, 2) at its point of unit
    /// distance from the vertex, counterclockwise about the outward direction.
    pub fn hl_leg(leg: usize, radius: f64, k: usize) -> Result<Self> {
        let l = *LEG_DIRECTIONS
            .get(leg)
            .ok_or_else(|| Error::InvalidInput(format!("leg index must be 0, 1 or 2, got {leg}")))?;
        let centres = [[0.0, 1.0, 1.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]];
        let u = [1.0, 0.0, 0.0];
        let v = cross(&l, &u);
        Self::circle(format!("hl-leg{}", leg + 1), &centres[leg], &u, &v, radius, k)
    }

    /// The unit circle orthogonal to the first leg, counterclockwise about the
    /// inward direction of that leg. It separates the first leg from the other
    /// two, so it is freely homotopic to the composite of the other two leg
    /// loops.
    pub fn hl_vertex(k: usize) -> Result<Self> {
        let l = LEG_DIRECTIONS[0];
        let axis = [-l[0], -l[1], -l[2]];
        let u = [1.0, 0.0, 0.0];
        let v = cross(&axis, &u);
        Self::circle("hl-vertex", &[0.0, 0.0, 0.0], &u, &v, 1.0, k)
    }

    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        LoopSpec {
            points,
            label: format!("{}-reversed", self.label),
        }
    }

    /// Smallest distance of a loop vertex to the discriminant.
    pub fn margin(&self, model: &FibrationModel) -> f64 {
        self.points
            .iter()
            .map(|b| model.base_distance(b))
            .fold(f64::INFINITY, f64::min)
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn basis_matrix(pb: &PeriodBasis) -> DMatrix<f64> {
    let n = pb.tau.len();
    DMatrix::from_fn(n, n, |i, j| pb.tau[j].comps[i])
}

/// Multitime component 0 is the non-angular one in both models.
fn angular_jump(a: &PeriodBasis, b: &PeriodBasis) -> f64 {
    a.multitime
        .iter()
        .zip(&b.multitime)
        .skip(1)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Continue `from` (at `prev`) to `b`, bisecting the segment when a solve
/// fails or an angular component jumps.
fn continue_to(
    ctx: &PeriodContext,
    h: &DeformationH,
    from: &PeriodBasis,
    prev: &[f64],
    b: &[f64],
    depth: usize,
) -> Result<PeriodBasis> {
    let attempt = BaseParams::from_slice(b).and_then(|bp| period_basis(ctx, h, &bp, Some(from)));
    let err = match attempt {
        Ok(pb) if angular_jump(from, &pb) <= MAX_PHASE_JUMP => return Ok(pb),
        Ok(_) => Error::BranchCrossing,
        Err(e) => e,
    };
    if depth >= MAX_SUBDIVISION {
        return Err(err);
    }
    let mid: Vec<f64> = prev.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    let half = continue_to(ctx, h, from, prev, &mid, depth + 1)?;
    continue_to(ctx, h, &half, &mid, b, depth + 1)
}

/// Period bases along the loop, starting from the principal branch at the
/// first point.
pub fn continue_along(ctx: &PeriodContext, h: &DeformationH, lp: &LoopSpec) -> Result<Vec<PeriodBasis>> {
    let b0 = BaseParams::from_slice(&lp.points[0])?;
    let mut out = vec![period_basis(ctx, h, &b0, None)?];
    for w in lp.points.windows(2) {
        let next = continue_to(ctx, h, out.last().expect("non-empty"), &w[0], &w[1], 0)?;
        out.push(next);
    }
    Ok(out)
}

pub fn transport_basis(ctx: &PeriodContext, h: &DeformationH, lp: &LoopSpec) -> Result<MonodromyMatrix> {
    transport_basis_with_margin(ctx, h, lp, DEFAULT_LOOP_MARGIN)
}

pub fn transport_basis_with_margin(
    ctx: &PeriodContext,
    h: &DeformationH,
    lp: &LoopSpec,
    loop_margin: f64,
) -> Result<MonodromyMatrix> {
    if lp.points.iter().any(|p| p.len() != ctx.model.n()) {
        return Err(Error::InvalidInput(format!(
            "loop points must have {} coordinates",
            ctx.model.n()
        )));
    }
    let margin = lp.margin(&ctx.model);
    if !(margin >= loop_margin) {
        let worst = lp
            .points
            .iter()
            .min_by(|a, b| ctx.model.base_distance(a).total_cmp(&ctx.model.base_distance(b)))
            .cloned()
            .unwrap_or_default();
        return Err(Error::OnDiscriminant(worst));
    }
    let bases = continue_along(ctx, h, lp)?;
    let b0 = basis_matrix(&bases[0]);
    let bf = basis_matrix(bases.last().expect("non-empty"));
    let raw = b0
        .lu()
        .solve(&bf)
        .ok_or_else(|| Error::InvalidInput("initial period basis is degenerate".into()))?;
    let n = raw.nrows();
    let mut residual: f64 = 0.0;
    let mut entries = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = raw[(i, j)];
            let r = v.round();
            residual = residual.max((v - r).abs());
            entries[i][j] = r as i64;
        }
    }
    if !(residual <= ROUNDING_TOL) {
        return Err(Error::NonIntegerMonodromy(residual));
    }
    Ok(MonodromyMatrix {
        entries: IntMatrix(entries),
        residual,
        raw: (0..n).map(|i| (0..n).map(|j| raw[(i, j)]).collect()).collect(),
    })
}

/// Harvey–Lawson sign convention: the basis `(τ₁, τ₂, −τ₃)`. Identity for
/// the focus-focus model.
pub fn normalize(model: &FibrationModel, m: &IntMatrix) -> IntMatrix {
    match model.kind {
        ModelKind::HarveyLawson { n: 3 } => m.conjugate_by_signs(&[1, 1, -1]),
        _ => m.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Ff22,
    Hl3,
}

pub fn expected_matrices(family: Family) -> Vec<IntMatrix> {
    match family {
        Family::Ff22 => vec![IntMatrix::from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]])],
        Family::Hl3 => vec![
            IntMatrix::from_rows([[1, 0, 0], [1, 1, 0], [0, 0, 1]]),
            IntMatrix::from_rows([[1, 0, 0], [0, 1, 0], [1, 0, 1]]),
            IntMatrix::from_rows([[1, 0, 0], [1, 1, 0], [1, 0, 1]]),
        ],
    }
}

/// A word of length at most 2 in the generators and their inverses that
/// equals `m`, e.g. `"M1"`, `"M2^-1"`, `"M1·M2"`; `"I"` for the identity.
pub fn identify(m: &IntMatrix, generators: &[IntMatrix]) -> Option<String> {
    let n = m.n();
    if *m == IntMatrix::identity(n) {
        return Some("I".into());
    }
    let mut letters: Vec<(String, IntMatrix)> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        letters.push((format!("M{}", i + 1), g.clone()));
        if let Some(inv) = g.inverse() {
            letters.push((format!("M{}^-1", i + 1), inv));
        }
    }
    if let Some((name, _)) = letters.iter().find(|(_, g)| g == m) {
        return Some(name.clone());
    }
    for (a, ga) in &letters {
        for (b, gb) in &letters {
            if ga.mul(gb) == *m {
                return Some(format!("{a}·{b}"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_matrix_algebra() {
        let m = expected_matrices(Family::Hl3);
        assert_eq!(m[0].mul(&m[1]), m[2]);
        for g in &m {
            assert_eq!(g.det(), 1);
            assert!(g.is_unipotent_of_order(2));
            assert_eq!(g.mul(&g.inverse().unwrap()), IntMatrix::identity(3));
        }
        assert_eq!(identify(&m[2], &m[..2]).as_deref(), Some("M1·M2"));
        assert_eq!(identify(&m[0].inverse().unwrap(), &m).as_deref(), Some("M1^-1"));
        let two = IntMatrix::from_rows([[2, 0], [0, 1]]);
        assert_eq!(two.det(), 2);
        assert!(two.inverse().is_none());
    }

    #[test]
    fn loop_geometry() {
        let model = FibrationModel::harvey_lawson(3).unwrap();
        for leg in 0..3 {
            let lp = LoopSpec::hl_leg(leg, 0.3, 16).unwrap();
            assert!((lp.margin(&model) - 0.3).abs() < 1e-12, "{leg}");
        }
        let v = LoopSpec::hl_vertex(32).unwrap();
        assert!(v.margin(&model) > 0.5);
        assert!(LoopSpec::new(vec![vec![0.0; 3]; 3], "x").is_err());
    }

    #[test]
    fn ff22_circle_is_the_dehn_twist() {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let h = DeformationH::zero(3);
        let lp = LoopSpec::ff22_circle(0.5, 0.5, 64).unwrap();
        let m = transport_basis(&ctx, &h, &lp).unwrap();
        assert_eq!(m.entries, expected_matrices(Family::Ff22)[0]);
        assert!(m.residual < 1e-12);
        let back = transport_basis(&ctx, &h, &lp.reversed()).unwrap();
        assert_eq!(back.entries, m.entries.inverse().unwrap());
    }

    #[test]
    fn contractible_loop_is_trivial() {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let h = DeformationH::parse("b1^2 + b2", 3).unwrap();
        let lp = LoopSpec::circle("off", &[1.0, 0.0, 0.4], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 0.5, 32).unwrap();
        let m = transport_basis(&ctx, &h, &lp).unwrap();
        assert_eq!(m.entries, IntMatrix::identity(3));
        assert!(m.residual < 1e-6);
    }

    #[test]
    fn near_discriminant_loop_is_rejected() {
        let ctx = PeriodContext::new(FibrationModel::focus_focus22()).unwrap();
        let lp = LoopSpec::ff22_circle(0.01, 0.5, 16).unwrap();
        assert!(matches!(
            transport_basis(&ctx, &DeformationH::zero(3), &lp),
            Err(Error::OnDiscriminant(_))
        ));
    }
}
