//! Thin helpers around faer for dense complex linear algebra.

use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

#[inline]
pub fn to_c64(z: C64) -> c64 {
    c64::new(z.re, z.im)
}

#[inline]
pub fn from_c64(z: c64) -> C64 {
    C64::new(z.re, z.im)
}

pub fn zeros(n: usize, m: usize) -> CMat {
    Mat::zeros(n, m)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn column_matrix(x: &[C64]) -> CMat {
    Mat::from_fn(x.len(), 1, |i, _| to_c64(x[i]))
}

pub fn column(m: &CMat, j: usize) -> Vec<C64> {
    (0..m.nrows()).map(|i| from_c64(m.read(i, j))).collect()
}

pub fn matvec(m: &CMat, x: &[C64]) -> Vec<C64> {
    let y = m * column_matrix(x);
    column(&y, 0)
}

pub fn adjoint_matvec(m: &CMat, x: &[C64]) -> Vec<C64> {
    let y = m.adjoint() * column_matrix(x);
    column(&y, 0)
}

/// One-norm (max column sum).
pub fn norm_one(m: &CMat) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m.read(i, j).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn scale(m: &CMat, s: C64) -> CMat {
    let s = to_c64(s);
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j) * s)
}

/// Solves m x = b; fails when the LU pivots indicate numerical singularity.
pub fn solve(m: &CMat, b: &[C64]) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lu = m.partial_piv_lu();
    let u = lu.compute_u();
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..n {
        let d = u.read(i, i).abs();
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    if !(dmin > 1e-14 * dmax) {
        return Err(Error::DenseSystemSingular(format!("pivot ratio {:.3e}", dmin / dmax)));
    }
    let x = lu.solve(column_matrix(b));
    let x = column(&x, 0);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DenseSystemSingular("non-finite solution".into()));
    }
    Ok(x)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    m.singular_values()
}

pub fn sigma_min(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn sigma_max(m: &CMat) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    m.eigenvalues::<c64>().into_iter().map(from_c64).collect()
}
