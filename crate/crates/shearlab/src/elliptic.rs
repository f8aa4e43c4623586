//! Screened Poisson operator d^2/dy^2 - k^2 on the line: explicit Green's function
//! convolution and the Dirichlet finite-difference solve.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::poisson::PoissonFactor;

/// |g| at the ends above this fraction of max|g| triggers a leakage warning.
pub const LEAKAGE_THRESHOLD: f64 = 1e-12;

pub fn boundary_leakage(g: &[C64]) -> bool {
    let peak = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match (g.first(), g.last()) {
        (Some(a), Some(b)) => peak > 0.0 && a.norm().max(b.norm()) > LEAKAGE_THRESHOLD * peak,
        _ => false,
    }
}

fn check_k(k: i32) -> Result<f64> {
    if k == 0 {
        Err(Error::SingularSystem("k = 0 makes d^2 - k^2 singular on the line".into()))
    } else {
        Ok((k as f64).abs())
    }
}

/// psi(y) = -(1/(2|k|)) int e^{-|k||y-z|} g(z) dz by the trapezoid rule, O(n)
/// through two exponential sweeps.
pub fn green_kernel_apply(k: i32, grid: &Grid, g: &[C64]) -> Result<Vec<C64>> {
    let kappa = check_k(k)?;
    assert_eq!(g.len(), grid.n);
    if boundary_leakage(g) {
        log::warn!("green_kernel_apply: input does not decay at the grid ends (boundary leakage)");
    }
    Ok(exp_convolution(kappa, grid, g))
}

/// The two-sweep kernel sum used by [`green_kernel_apply`].
pub fn exp_convolution(kappa: f64, grid: &Grid, g: &[C64]) -> Vec<C64> {
    let n = grid.n;
    let h = grid.h;
    let r = (-kappa * h).exp();
    let wt = |j: usize| if j == 0 || j == n - 1 { 0.5 * h } else { h };
    let mut left = vec![C64::new(0.0, 0.0); n];
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..n {
        acc = acc * r + g[j] * wt(j);
        left[j] = acc;
    }
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut acc = C64::new(0.0, 0.0);
    for j in (0..n).rev() {
        out[j] = -(left[j] + acc) / (2.0 * kappa);
        acc = (acc + g[j] * wt(j)) * r;
    }
    out
}

/// Second-order finite-difference solve of (d^2 - k^2) psi = g with psi = 0 at the
/// ghost nodes.
pub fn poisson_solve(k: i32, grid: &Grid, g: &[C64]) -> Result<Vec<C64>> {
    check_k(k)?;
    assert_eq!(g.len(), grid.n);
    if boundary_leakage(g) {
        log::warn!("poisson_solve: input does not decay at the grid ends (boundary leakage)");
    }
    Ok(PoissonFactor::new(grid.n, grid.h, k as f64).solve(g))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreensRepresentation {
    ExplicitExponential,
    FactoredTridiagonal,
}

/// Green's operator of d^2 - k^2 on a fixed grid.
#[derive(Clone, Debug)]
pub struct GreensKernel {
    pub k: i32,
    pub representation: GreensRepresentation,
    pub grid: Grid,
    factor: Option<PoissonFactor>,
}

impl GreensKernel {
    pub fn new(k: i32, grid: Grid, representation: GreensRepresentation) -> Result<Self> {
        check_k(k)?;
        let factor = match representation {
            GreensRepresentation::FactoredTridiagonal => Some(PoissonFactor::new(grid.n, grid.h, k as f64)),
            GreensRepresentation::ExplicitExponential => None,
        };
        Ok(GreensKernel { k, representation, grid, factor })
    }

    pub fn apply(&self, g: &[C64]) -> Vec<C64> {
        match &self.factor {
            Some(f) => f.solve(g),
            None => exp_convolution((self.k as f64).abs(), &self.grid, g),
        }
    }

    /// Column for a unit-mass source at node j.
    pub fn column(&self, j: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); self.grid.n];
        let w = if self.factor.is_none() && (j == 0 || j == self.grid.n - 1) { 0.5 } else { 1.0 };
        e[j] = C64::new(1.0 / (self.grid.h * w), 0.0);
        self.apply(&e)
    }
}
