//! Spectral polynomial of the Harvey–Lawson base, its maximal real root and
//! the discriminant locus.
//!
//! For `b = (b1, …, bn)` the polynomial is `P_b(x) = x·∏_{j≥2}(x − b_j) − b1²`.
//! Its largest real root `ζ₀(b)` is simple exactly off the discriminant Δ.

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{Error, Result};

/// Residual tolerance for roots, relative to [`SpectralPolynomial::scale`].
pub const TOL_ROOT: f64 = 1e-10;

/// Imaginary-part cutoff for accepting a companion eigenvalue as real.
const IMAG_TOL: f64 = 1e-9;
/// Looser cutoff for eigenvalues split off a multiple root by rounding.
const IMAG_TOL_CLUSTER: f64 = 1e-5;
/// Roots closer than this (relative to scale) are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-7;

/// A point of the base, `n ≥ 2` finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseParams {
    b: Vec<f64>,
}

impl BaseParams {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "base dimension must be at least 2, got {}",
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite base point {b:?}")));
        }
        Ok(BaseParams { b })
    }

    pub fn from_slice(b: &[f64]) -> Result<Self> {
        Self::new(b.to_vec())
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.b
    }

    pub fn norm(&self) -> f64 {
        self.b.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<usize> for BaseParams {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.b[i]
    }
}

/// Monic polynomial with coefficients in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPolynomial {
    coeffs: Vec<f64>,
}

impl SpectralPolynomial {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs[0] != 1.0 {
            return Err(Error::InvalidInput(
                "polynomial must be monic of degree at least 1".into(),
            ));
        }
        Ok(SpectralPolynomial { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `1 + max |coeff|`, the magnitude against which residuals are judged.
    pub fn scale(&self) -> f64 {
        1.0 + self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * x + c)
    }

    /// Value and first derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for c in &self.coeffs {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    /// All complex roots of `P(x) − shift` via the companion matrix.
    pub fn roots(&self, shift: f64) -> Vec<Complex<f64>> {
        let n = self.degree();
        let mut c = self.coeffs.clone();
        c[n] -= shift;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            m[(0, j)] = -c[j + 1];
        }
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        match nalgebra::Schur::try_new(m, f64::EPSILON, 1000) {
            Some(schur) => schur.complex_eigenvalues().iter().copied().collect(),
            None => aberth(&c),
        }
    }

    /// Coefficients of `Q` with `P = (x − r)·Q + remainder`, and the remainder.
    pub fn deflate(&self, r: f64) -> (Vec<f64>, f64) {
        let n = self.degree();
        let mut q = Vec::with_capacity(n);
        let mut acc = 0.0;
        for c in &self.coeffs[..n] {
            acc = acc * r + c;
            q.push(acc);
        }
        let rem = acc * r + self.coeffs[n];
        (q, rem)
    }
}

/// Simultaneous Aberth–Ehrlich iteration, used when the QR iteration on the
/// companion matrix stalls (nilpotent companions such as `x³`).
fn aberth(c: &[f64]) -> Vec<Complex<f64>> {
    let n = c.len() - 1;
    let radius = 1.0 + c.iter().skip(1).fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut z: Vec<Complex<f64>> = (0..n)
        .map(|k| Complex::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let horner = |x: Complex<f64>| {
        let mut p = Complex::new(0.0, 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &ck in c {
            dp = dp * x + p;
            p = p * x + ck;
        }
        (p, dp)
    };
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = horner(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm());
            }
        }
        if moved <= 1e-16 * radius {
            break;
        }
    }
    z
}

/// Root data for one base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootProfile {
    pub zeta0: f64,
    /// `P′_b(ζ₀)`
    pub dp: f64,
    /// `Q_b(ζ₀)`
    pub q0: f64,
    pub eps: f64,
    /// Maximal real root of `P_b − ε²`.
    pub zeta_eps: f64,
    pub on_delta: bool,
}

pub fn build_poly(b: &BaseParams) -> SpectralPolynomial {
    let mut coeffs = vec![1.0, 0.0];
    for &bj in &b.as_slice()[1..] {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] += c;
            next[k + 1] -= bj * c;
        }
        coeffs = next;
    }
    let last = coeffs.len() - 1;
    coeffs[last] -= b[0] * b[0];
    SpectralPolynomial { coeffs }
}

/// Largest real solution of `P(x) = shift`.
///
/// Companion eigenvalues are filtered to the real ones, the largest is
/// Newton-polished, and a cluster of nearly equal maximal roots (a multiple
/// root split by rounding) is replaced by its mean.
pub fn max_real_root(p: &SpectralPolynomial, shift: f64) -> Result<f64> {
    if !(shift >= 0.0) {
        return Err(Error::InvalidInput(format!("shift must be ≥ 0, got {shift}")));
    }
    let scale = p.scale() + shift;
    let f = |x: f64| p.eval(x) - shift;
    let mut reals: Vec<f64> = p
        .roots(shift)
        .into_iter()
        .filter(|z| {
            let im = z.im.abs();
            im <= IMAG_TOL * scale
                || (im <= IMAG_TOL_CLUSTER * scale && f(z.re).abs() <= TOL_ROOT * scale)
        })
        .map(|z| z.re)
        .collect();
    if reals.is_empty() {
        return Err(Error::NoRealRoot);
    }
    reals.sort_by(|a, b| b.total_cmp(a));
    let top = reals[0];
    let cluster: Vec<f64> = reals
        .iter()
        .copied()
        .take_while(|r| top - r <= CLUSTER_TOL * scale)
        .collect();
    let mut x = cluster.iter().sum::<f64>() / cluster.len() as f64;
    if cluster.len() == 1 {
        for _ in 0..5 {
            let (v, dv) = p.eval_with_derivative(x);
            let v = v - shift;
            if dv == 0.0 || v == 0.0 {
                break;
            }
            let nx = x - v / dv;
            if f(nx).abs() < v.abs() {
                x = nx;
            } else {
                break;
            }
        }
    }
    Ok(x)
}

/// Default discriminant tolerance `1e−7·(1 + ‖b‖^{n−1})`.
pub fn default_tol_disc(b: &BaseParams) -> f64 {
    1e-7 * (1.0 + b.norm().powi(b.n() as i32 - 1))
}

pub fn zeta0(b: &BaseParams) -> Result<f64> {
    max_real_root(&build_poly(b), 0.0)
}

/// `ζ₁(b)`, the maximal real root of `P_b − 1`.
pub fn zeta1(b: &BaseParams) -> Result<f64> {
    max_real_root(&build_poly(b), 1.0)
}

pub fn root_profile(b: &BaseParams, eps: f64) -> Result<RootProfile> {
    let p = build_poly(b);
    let zeta0 = max_real_root(&p, 0.0)?;
    let zeta_eps = max_real_root(&p, eps * eps)?;
    let dp = p.derivative(zeta0);
    let (q, _) = p.deflate(zeta0);
    let q0 = q.iter().fold(0.0, |acc, c| acc * zeta0 + c);
    Ok(RootProfile {
        zeta0,
        dp,
        q0,
        eps,
        zeta_eps,
        on_delta: dp.abs() <= default_tol_disc(b),
    })
}

/// `Q_b(ζ₀)` and the coefficients of `Q_b = P_b/(x − ζ₀)`.
pub fn q_factor(b: &BaseParams) -> Result<(f64, Vec<f64>)> {
    let p = build_poly(b);
    let z0 = max_real_root(&p, 0.0)?;
    Ok(q_factor_at(&p, z0))
}

pub fn q_factor_at(p: &SpectralPolynomial, zeta0: f64) -> (f64, Vec<f64>) {
    let (q, _) = p.deflate(zeta0);
    let q0 = q.iter().fold(0.0, |acc, c| acc * zeta0 + c);
    (q0, q)
}

/// `∂_{b_j}P_b` evaluated at `x`.
pub fn poly_partials(b: &BaseParams, x: f64) -> Vec<f64> {
    let bs = b.as_slice();
    let n = bs.len();
    let mut out = vec![-2.0 * bs[0]];
    for j in 1..n {
        let mut prod = -x;
        for (k, &bk) in bs.iter().enumerate().skip(1) {
            if k != j {
                prod *= x - bk;
            }
        }
        out.push(prod);
    }
    out
}

pub fn zeta0_gradient(b: &BaseParams) -> Result<Vec<f64>> {
    let p = build_poly(b);
    let z0 = max_real_root(&p, 0.0)?;
    let dp = p.derivative(z0);
    if dp.abs() <= default_tol_disc(b) {
        return Err(Error::OnDiscriminant(b.as_slice().to_vec()));
    }
    Ok(poly_partials(b, z0).into_iter().map(|d| -d / dp).collect())
}

pub fn on_discriminant(b: &BaseParams, tol_disc: f64) -> bool {
    let p = build_poly(b);
    match max_real_root(&p, 0.0) {
        Ok(z0) => p.derivative(z0).abs() <= tol_disc,
        Err(_) => false,
    }
}

/// The three legs of Δ for n = 3, as unit direction vectors of rays from 0.
pub const LEG_DIRECTIONS: [[f64; 3]; 3] = [
    [0.0, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [0.0, 0.0, -1.0],
    [0.0, -1.0, 0.0],
];

/// Euclidean distances from `b ∈ ℝ³` to each of the three legs.
pub fn leg_distances(b: &[f64; 3]) -> [f64; 3] {
    let [b1, b2, b3] = *b;
    let r = (b1 * b1 + b2 * b2 + b3 * b3).sqrt();
    let d1 = if b2 + b3 > 0.0 {
        (b1 * b1 + 0.5 * (b2 - b3) * (b2 - b3)).sqrt()
    } else {
        r
    };
    let d2 = if b3 < 0.0 { b1.hypot(b2) } else { r };
    let d3 = if b2 < 0.0 { b1.hypot(b3) } else { r };
    [d1, d2, d3]
}

/// Distance to Δ.
///
/// Exact for n = 3 (union of the three legs and the vertex). For other `n`
/// this is the proxy `|P′_b(ζ₀)|`, which vanishes exactly on Δ but is not a
/// metric distance.
pub fn dist_to_discriminant(b: &BaseParams) -> f64 {
    if b.n() == 3 {
        let s = b.as_slice();
        let d = leg_distances(&[s[0], s[1], s[2]]);
        d[0].min(d[1]).min(d[2])
    } else {
        let p = build_poly(b);
        match max_real_root(&p, 0.0) {
            Ok(z0) => p.derivative(z0).abs(),
            Err(_) => f64::NAN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(v: &[f64]) -> BaseParams {
        BaseParams::from_slice(v).unwrap()
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(build_poly(&bp(&[0.0, 0.0, 0.0])).coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(build_poly(&bp(&[0.0, 1.0, 2.0])).coeffs(), &[1.0, -3.0, 2.0, 0.0]);
        assert_eq!(build_poly(&bp(&[1.0, 0.0])).coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn rejects_bad_base() {
        assert!(BaseParams::new(vec![1.0]).is_err());
        assert!(BaseParams::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn max_root_examples() {
        let p = SpectralPolynomial::from_coeffs(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(max_real_root(&p, 0.0).unwrap().abs() < 1e-12);
        let p = build_poly(&bp(&[1.0, 0.0]));
        assert!((max_real_root(&p, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((max_real_root(&p, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        for (b2, b3) in [(0.3, 0.7), (-0.5, 0.2), (-1.0, -2.0), (1.0, 1.0), (0.0, -1.0)] {
            let z = zeta0(&bp(&[0.0, b2, b3])).unwrap();
            assert!((z - 0f64.max(b2).max(b3)).abs() < 1e-9, "{b2} {b3} {z}");
        }
    }

    #[test]
    fn q_factor_examples() {
        let (q0, q) = q_factor(&bp(&[1.0, 0.0])).unwrap();
        assert!((q0 - 2.0).abs() < 1e-14);
        assert!((q[0] - 1.0).abs() < 1e-15 && (q[1] - 1.0).abs() < 1e-14);
        let (q0, _) = q_factor(&bp(&[0.0, 1.0, 1.0])).unwrap();
        assert!(q0.abs() < 1e-7);
        let (q0, q) = q_factor(&bp(&[1.0, 0.0, 0.0])).unwrap();
        assert!((q0 - 3.0).abs() < 1e-13);
        assert!(q.iter().zip([1.0, 1.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn gradient_examples() {
        let g = zeta0_gradient(&bp(&[1.0, 0.0])).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-13 && (g[1] - 0.5).abs() < 1e-13);
        let g = zeta0_gradient(&bp(&[1.0, 0.0, 0.0])).unwrap();
        for (a, e) in g.iter().zip([2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) {
            assert!((a - e).abs() < 1e-12);
        }
        let g = zeta0_gradient(&bp(&[0.0, 0.4, 0.9])).unwrap();
        assert_eq!(g[0], 0.0);
        assert!(matches!(
            zeta0_gradient(&bp(&[0.0, 1.0, 1.0])),
            Err(Error::OnDiscriminant(_))
        ));
    }

    #[test]
    fn discriminant_examples() {
        let tol = |b: &BaseParams| default_tol_disc(b);
        for (v, expect) in [
            ([0.0, 1.0, 1.0], true),
            ([0.0, 0.0, 0.0], true),
            ([1.0, 0.0, 0.0], false),
            ([0.0, 0.0, -1.0], true),
            ([0.0, -1.0, 0.0], true),
            ([0.0, 0.0, 1.0], false),
        ] {
            let b = bp(&v);
            assert_eq!(on_discriminant(&b, tol(&b)), expect, "{v:?}");
        }
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dist_to_discriminant(&bp(&[0.0, 1.0, 1.0])), 0.0);
        assert_eq!(dist_to_discriminant(&bp(&[0.0, 0.0, 0.0])), 0.0);
        let h = 1e-3;
        let d = dist_to_discriminant(&bp(&[0.0, 1.0 + h, 1.0 - h]));
        assert!((d - 2f64.sqrt() * h).abs() < 1e-15);
        let d = dist_to_discriminant(&bp(&[0.3, 0.0, -2.0]));
        assert!((d - 0.3).abs() < 1e-15);
        let d = dist_to_discriminant(&bp(&[0.0, 0.0, 0.5]));
        assert!((d - 0.125f64.sqrt()).abs() < 1e-15);
        let d = dist_to_discriminant(&bp(&[0.0, 0.5, -0.5]));
        assert!((d - 0.5).abs() < 1e-15);
    }
}
