//! Dirichlet second difference and the screened Poisson factor D2 - k^2.

use num_complex::Complex64 as C64;

/// D2 x with zero ghost values beyond both ends.
pub fn second_difference(x: &[C64], h: f64) -> Vec<C64> {
    let n = x.len();
    let inv = 1.0 / (h * h);
    let zero = C64::new(0.0, 0.0);
    (0..n)
        .map(|i| {
            let l = if i > 0 { x[i - 1] } else { zero };
            let r = if i + 1 < n { x[i + 1] } else { zero };
            (l - 2.0 * x[i] + r) * inv
        })
        .collect()
}

/// Centered first difference with zero ghosts.
pub fn centered_difference(x: &[C64], h: f64) -> Vec<C64> {
    let n = x.len();
    let zero = C64::new(0.0, 0.0);
    (0..n)
        .map(|i| {
            let l = if i > 0 { x[i - 1] } else { zero };
            let r = if i + 1 < n { x[i + 1] } else { zero };
            (r - l) / (2.0 * h)
        })
        .collect()
}

/// Thomas factorization of D2 - k^2 (symmetric, strictly diagonally dominant).
#[derive(Clone, Debug)]
pub struct PoissonFactor {
    n: usize,
    off: f64,
    // modified super-diagonal and reciprocal pivots
    cp: Vec<f64>,
    inv_piv: Vec<f64>,
    pub k: f64,
    pub h: f64,
}

impl PoissonFactor {
    pub fn new(n: usize, h: f64, k: f64) -> Self {
        let off = 1.0 / (h * h);
        let diag = -2.0 * off - k * k;
        let mut cp = vec![0.0; n];
        let mut inv_piv = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let piv = diag - off * prev;
            inv_piv[i] = 1.0 / piv;
            cp[i] = off * inv_piv[i];
            prev = cp[i];
        }
        PoissonFactor { n, off, cp, inv_piv, k, h }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solves (D2 - k^2) x = b in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        if n == 0 {
            return;
        }
        b[0] *= self.inv_piv[0];
        for i in 1..n {
            let prev = b[i - 1];
            b[i] = (b[i] - self.off * prev) * self.inv_piv[i];
        }
        for i in (0..n - 1).rev() {
            let next = b[i + 1];
            b[i] -= self.cp[i] * next;
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// (D2 - k^2) x.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let k2 = self.k * self.k;
        second_difference(x, self.h).into_iter().zip(x).map(|(d, v)| d - k2 * v).collect()
    }
}
