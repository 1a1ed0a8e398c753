//! Globally adaptive 64-point Gauss–Legendre quadrature.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const GL_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            max_intervals: 10_000,
        }
    }
}

/// Nodes and weights on [−1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

fn gl<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    x.iter().zip(w).map(|(xi, wi)| wi * f(c + r * xi)).sum::<f64>() * r
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn piece<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Piece {
    let m = 0.5 * (a + b);
    let whole = gl(f, a, b);
    let halves = gl(f, a, m) + gl(f, m, b);
    Piece {
        a,
        b,
        value: halves,
        err: (halves - whole).abs(),
    }
}

/// Integral of `f` over `[a, b]` and the number of subintervals used.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `rel_tol·|I|`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<(f64, usize)> {
    let mut heap = BinaryHeap::new();
    let first = piece(&mut f, a, b);
    let mut total = first.value;
    let mut err = first.err;
    heap.push(first);
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureFailure(heap.len()));
        }
        if err <= opts.rel_tol * total.abs() || err <= f64::MIN_POSITIVE {
            return Ok((total, heap.len()));
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure(heap.len()));
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            return Err(Error::QuadratureFailure(heap.len() + 1));
        }
        let l = piece(&mut f, worst.a, m);
        let r = piece(&mut f, m, worst.b);
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        // Rebuild the sums now and then so cancellation does not accumulate.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn polynomial_and_peak() {
        let (v, _) = integrate(|x| x.powi(7), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - 0.125).abs() < 1e-15);
        let eps: f64 = 1e-5;
        let (v, _) = integrate(|x| 1.0 / (x * x + eps * eps), -1.0, 1.0, &QuadOptions::default()).unwrap();
        let exact = 2.0 * (1.0 / eps).atan() / eps;
        assert!(((v - exact) / exact).abs() < 1e-10);
    }
}
