//! Operators M = a D2 + diag(d) + diag(c) G with G = (D2 - k^2)^{-1} (Dirichlet).
//!
//! Solves go through the interleaved banded system in (x, G x), which costs O(n)
//! per factorization and is algebraically identical to eliminating G.

use faer::Mat;
use num_complex::Complex64 as C64;

use super::banded::{BandLu, BandMatrix};
use super::dense::{to_c64, CMat};
use super::poisson::{second_difference, PoissonFactor};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct CoupledOperator {
    pub h: f64,
    pub k: f64,
    pub a: C64,
    pub d: Vec<C64>,
    pub c: Vec<C64>,
    poisson: PoissonFactor,
}

/// Factored interleaved system; `solve` returns (x, auxiliary field).
#[derive(Clone, Debug)]
pub struct CoupledLu {
    lu: BandLu,
    n: usize,
}

impl CoupledLu {
    pub fn solve(&self, y: &[C64]) -> (Vec<C64>, Vec<C64>) {
        assert_eq!(y.len(), self.n);
        let mut rhs = vec![C64::new(0.0, 0.0); 2 * self.n];
        for (i, v) in y.iter().enumerate() {
            rhs[2 * i] = *v;
        }
        self.lu.solve_in_place(&mut rhs);
        let x = rhs.iter().step_by(2).cloned().collect();
        let aux = rhs.iter().skip(1).step_by(2).cloned().collect();
        (x, aux)
    }
}

impl CoupledOperator {
    pub fn new(h: f64, k: f64, a: C64, d: Vec<C64>, c: Vec<C64>) -> Self {
        assert_eq!(d.len(), c.len());
        let poisson = PoissonFactor::new(d.len(), h, k);
        CoupledOperator { h, k, a, d, c, poisson }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn poisson(&self) -> &PoissonFactor {
        &self.poisson
    }

    pub fn is_uncoupled(&self) -> bool {
        self.c.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// (M x, G x).
    pub fn apply_with_psi(&self, x: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let psi = self.poisson.solve(x);
        let d2 = second_difference(x, self.h);
        let y = (0..x.len()).map(|i| self.a * d2[i] + self.d[i] * x[i] + self.c[i] * psi[i]).collect();
        (y, psi)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.apply_with_psi(x).0
    }

    /// M^H x = conj(a) D2 x + conj(d) x + G (conj(c) x).
    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let cx: Vec<C64> = x.iter().zip(&self.c).map(|(v, c)| c.conj() * v).collect();
        let phi = self.poisson.solve(&cx);
        let d2 = second_difference(x, self.h);
        (0..x.len()).map(|i| self.a.conj() * d2[i] + self.d[i].conj() * x[i] + phi[i]).collect()
    }

    fn factor_with(&self, a: C64, d: &[C64], p: &[C64], q: &[C64]) -> Result<CoupledLu> {
        let n = self.n();
        let h2 = self.h * self.h;
        let mut m = BandMatrix::zeros(2 * n, 2, 2);
        let one = C64::new(1.0, 0.0);
        for i in 0..n {
            let r = 2 * i;
            m.set(r, r, -2.0 * a / h2 + d[i]);
            if i > 0 {
                m.set(r, r - 2, a / h2);
            }
            if i + 1 < n {
                m.set(r, r + 2, a / h2);
            }
            m.set(r, r + 1, p[i]);
            // auxiliary row scaled by h^2: (z_{i-1} - (2 + k^2 h^2) z_i + z_{i+1}) - h^2 q_i x_i = 0
            let s = r + 1;
            m.set(s, s, C64::new(-2.0 - self.k * self.k * h2, 0.0));
            if i > 0 {
                m.set(s, s - 2, one);
            }
            if i + 1 < n {
                m.set(s, s + 2, one);
            }
            m.set(s, r, -q[i] * h2);
        }
        Ok(CoupledLu { lu: m.factor()?, n })
    }

    /// Factorization of M; `solve` returns (x, G x).
    pub fn factor(&self) -> Result<CoupledLu> {
        let ones = vec![C64::new(1.0, 0.0); self.n()];
        self.factor_with(self.a, &self.d, &self.c, &ones)
    }

    /// Factorization of M^H; `solve` returns (x, G(conj(c) x)).
    pub fn factor_adjoint(&self) -> Result<CoupledLu> {
        let ones = vec![C64::new(1.0, 0.0); self.n()];
        let d: Vec<C64> = self.d.iter().map(|z| z.conj()).collect();
        let c: Vec<C64> = self.c.iter().map(|z| z.conj()).collect();
        self.factor_with(self.a.conj(), &d, &ones, &c)
    }

    /// Dense G = (D2 - k^2)^{-1}.
    pub fn dense_green(&self) -> CMat {
        dense_green(&self.poisson)
    }

    /// Dense M.
    pub fn dense(&self) -> CMat {
        let n = self.n();
        let g = self.dense_green();
        let h2 = self.h * self.h;
        Mat::from_fn(n, n, |i, j| {
            let mut v = self.c[i] * super::dense::from_c64(g.read(i, j));
            if i == j {
                v += -2.0 * self.a / h2 + self.d[i];
            } else if i + 1 == j || j + 1 == i {
                v += self.a / h2;
            }
            to_c64(v)
        })
    }
}

/// Dense inverse of the Dirichlet D2 - k^2 by column solves.
pub fn dense_green(p: &PoissonFactor) -> CMat {
    let n = p.n();
    let mut g = Mat::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        e[j] = C64::new(1.0, 0.0);
        p.solve_in_place(&mut e);
        for i in 0..n {
            g.write(i, j, to_c64(e[i]));
        }
    }
    g
}
