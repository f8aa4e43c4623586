//! Uniform grids and grid-function helpers.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Uniform nodes `lo + j h`, j = 0..n. Functions vanish at the ghost nodes
/// `lo - h` and `lo + n h` (homogeneous Dirichlet truncation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2 && hi > lo, "degenerate grid");
        Grid { lo, h: (hi - lo) / (n - 1) as f64, n }
    }

    /// Symmetric grid on [-half_width, half_width] with spacing at most `h_max`.
    pub fn symmetric(half_width: f64, h_max: f64) -> Self {
        let cells = (2.0 * half_width / h_max).ceil().max(1.0) as usize;
        Grid::new(-half_width, half_width, cells + 1)
    }

    /// Grid with exact spacing `h` covering at least [lo, hi].
    pub fn with_spacing(lo: f64, hi: f64, h: f64) -> Self {
        let cells = ((hi - lo) / h).ceil().max(1.0) as usize;
        Grid { lo, h, n: cells + 1 }
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.lo + j as f64 * self.h
    }

    pub fn hi(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - 1e-12 * self.h && x <= self.hi() + 1e-12 * self.h
    }

    /// Index of the node nearest to x (clamped).
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x - self.lo) / self.h).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn sample<F: Fn(f64) -> C64>(&self, f: F) -> Vec<C64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    pub fn sample_real<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.n).map(|j| f(self.x(j))).collect()
    }

    /// Trapezoid rule (end weights h/2).
    pub fn trapezoid(&self, f: &[C64]) -> C64 {
        assert_eq!(f.len(), self.n);
        let inner: C64 = f.iter().sum();
        (inner - 0.5 * (f[0] + f[self.n - 1])) * self.h
    }

    pub fn l2_norm(&self, f: &[C64]) -> f64 {
        (self.h * f.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }
}

pub fn max_abs(f: &[C64]) -> f64 {
    f.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn l2(f: &[C64]) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// |a - b|_2 / |b|_2 with plain sums (grid weights cancel).
pub fn rel_l2_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn real(f: &[f64]) -> Vec<C64> {
    f.iter().map(|&x| C64::new(x, 0.0)).collect()
}
