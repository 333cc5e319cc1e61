//! Dense helpers for the small matrices that appear on finite truncations.

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

pub(crate) const PERRON_TOL: f64 = 1e-12;
const MAX_ITERS: usize = 2_000_000;

/// Perron eigen-data of a nonnegative primitive matrix.
#[derive(Debug, Clone)]
pub(crate) struct PerronPair {
    pub value: f64,
    /// Right vector, `A r = λ r`, normalized to `‖r‖₁ = 1`.
    pub right: Vec<f64>,
    /// Left vector, `l A = λ l`, normalized to `‖l‖₁ = 1`.
    pub left: Vec<f64>,
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

/// Power iteration stopped on the Collatz–Wielandt bracket
/// `min (Ar)_i/r_i ≤ λ ≤ max (Ar)_i/r_i`.
fn perron_vector(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let n = a.len();
    if n == 0 {
        return Err(domain("empty matrix"));
    }
    let mut r = vec![1.0 / n as f64; n];
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITERS {
        let ar = mat_vec(a, &r);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for (x, y) in ar.iter().zip(&r) {
            if *y > 0.0 {
                let q = x / y;
                lo = lo.min(q);
                hi = hi.max(q);
            }
        }
        let norm: f64 = ar.iter().sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("matrix annihilates the positive cone"));
        }
        gap = (hi - lo) / hi;
        r = ar.into_iter().map(|x| x / norm).collect();
        if gap <= PERRON_TOL {
            return Ok((0.5 * (lo + hi), r));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERS,
        gap,
    })
}

pub(crate) fn perron(a: &[Vec<f64>]) -> Result<PerronPair> {
    let (value, right) = perron_vector(a)?;
    let (_, left) = perron_vector(&transpose(a))?;
    Ok(PerronPair { value, right, left })
}

/// Stationary row vector of a stochastic matrix, `π P = π`, `Σ π = 1`.
///
/// Fails when the stationary vector is not unique (several closed classes).
pub(crate) fn stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| domain("stationary vector is not unique; supply it explicitly"))?;
    let pi: Vec<f64> = pi.iter().map(|&x| if x.abs() < 1e-15 { 0.0 } else { x }).collect();
    if pi.iter().any(|&x| x < -1e-10 || !x.is_finite()) {
        return Err(domain("stationary vector is not unique; supply it explicitly"));
    }
    let residual = stationarity_residual(p, &pi);
    if residual > 1e-9 {
        return Err(domain(format!(
            "stationary solve is ill-conditioned (residual {residual:e})"
        )));
    }
    Ok(pi.into_iter().map(|x| x.max(0.0)).collect())
}

/// `max_j |(π P)_j − π_j|`.
pub(crate) fn stationarity_residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = p.len();
    (0..n)
        .map(|j| {
            let s: f64 = (0..n).map(|i| pi[i] * p[i][j]).sum();
            (s - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Smallest `p ≤ (n−1)²+1` with `A^p > 0` entrywise, for a 0/1 pattern.
pub(crate) fn primitivity_exponent(pattern: &[Vec<bool>]) -> Option<usize> {
    let n = pattern.len();
    if n == 0 {
        return None;
    }
    let bound = (n - 1) * (n - 1) + 1;
    let mut power = pattern.to_vec();
    for p in 1..=bound {
        if power.iter().all(|row| row.iter().all(|&x| x)) {
            return Some(p);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if power[i][k] {
                    for j in 0..n {
                        if pattern[k][j] {
                            next[i][j] = true;
                        }
                    }
                }
            }
        }
        power = next;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_perron() {
        let a = vec![vec![1.0, 1.0], vec![1.0, 0.0]];
        let pp = perron(&a).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pp.value - golden).abs() < 1e-12);
        // right vector ∝ (φ, 1)
        assert!((pp.right[0] / pp.right[1] - golden).abs() < 1e-10);
    }

    #[test]
    fn stationary_of_two_state_chain() {
        let p = vec![vec![0.9, 0.1], vec![0.5, 0.5]];
        let pi = stationary(&p).unwrap();
        assert!((pi[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((pi[1] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn reducible_chain_needs_explicit_stationary() {
        let p = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(stationary(&p).is_err());
    }

    #[test]
    fn primitivity() {
        let t = true;
        let f = false;
        assert_eq!(primitivity_exponent(&[vec![t, t], vec![t, f]]), Some(2));
        assert_eq!(primitivity_exponent(&[vec![t, f], vec![f, t]]), None);
        assert_eq!(primitivity_exponent(&[vec![f, t], vec![t, f]]), None);
        assert_eq!(primitivity_exponent(&[vec![t, t], vec![t, t]]), Some(1));
    }
}
