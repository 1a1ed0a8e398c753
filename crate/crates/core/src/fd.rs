//! Central finite differences.

use crate::error::Result;

/// `∂_J f(b)` by nested central differences with step `h` in every slot.
pub fn mixed_partial<F>(f: &F, b: &[f64], index: &[usize], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    match index.split_last() {
        None => f(b),
        Some((&i, rest)) => {
            let mut p = b.to_vec();
            p[i] = b[i] + h;
            let fp = mixed_partial(f, &p, rest, h)?;
            p[i] = b[i] - h;
            let fm = mixed_partial(f, &p, rest, h)?;
            Ok((fp - fm) / (2.0 * h))
        }
    }
}

/// Central-difference gradient.
pub fn gradient<F>(f: &F, b: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    (0..b.len()).map(|i| mixed_partial(f, b, &[i], h)).collect()
}

/// All non-decreasing index tuples of length `0..=k_max` over `n` slots.
pub fn multi_indices(n: usize, k_max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..k_max {
        let mut next = Vec::new();
        for j in &frontier {
            let lo = j.last().copied().unwrap_or(0);
            for i in lo..n {
                let mut k = j.clone();
                k.push(i);
                next.push(k);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_partial_of_polynomial() {
        let f = |b: &[f64]| -> Result<f64> { Ok(b[0] * b[0] * b[1] + b[1].powi(3)) };
        let v = mixed_partial(&f, &[0.3, 0.7], &[0, 1], 1e-3).unwrap();
        assert!((v - 0.6).abs() < 1e-9);
        let v = mixed_partial(&f, &[0.3, 0.7], &[1, 1], 1e-3).unwrap();
        assert!((v - 4.2).abs() < 1e-6);
    }

    #[test]
    fn index_counts() {
        assert_eq!(multi_indices(3, 0).len(), 1);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(3, 3).len(), 20);
    }
}
