//! Lanczos iteration for the top of the spectrum of a Hermitian operator.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic, generic start vector.
pub fn start_vector(n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|i| {
            let x = i as f64;
            C64::new(1.0 + 0.5 * (0.7 * x).sin(), 0.3 * (1.3 * x).cos())
        })
        .collect();
    let s = norm(&v);
    v.into_iter().map(|z| z / s).collect()
}

fn top_ritz(alpha: &[f64], beta: &[f64]) -> f64 {
    let m = alpha.len();
    let t = Mat::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    t.selfadjoint_eigenvalues(faer::Side::Lower).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of the Hermitian operator `apply` on C^n, with full
/// reorthogonalization.
pub fn largest_eigenvalue<F: FnMut(&[C64]) -> Result<Vec<C64>>>(
    n: usize,
    mut apply: F,
    max_iter: usize,
    tol: f64,
) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<C64>> = vec![start_vector(n)];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = f64::NAN;
    let mut stable = 0;
    for it in 0..max_iter.min(n) {
        let v = basis[it].clone();
        let mut w = apply(&v)?;
        let a = dot(&v, &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let ritz = top_ritz(&alpha, &beta);
        let b = norm(&w);
        if (ritz - last).abs() <= tol * ritz.abs() {
            stable += 1;
        } else {
            stable = 0;
        }
        last = ritz;
        if stable >= 2 || b <= 1e-14 * ritz.abs().max(1e-300) || it + 1 == n {
            return Ok(ritz);
        }
        beta.push(b);
        basis.push(w.into_iter().map(|z| z / b).collect());
    }
    Err(Error::NonConvergence(format!("Lanczos did not settle in {max_iter} steps (last Ritz value {last:.6e})")))
}
