//! Complex banded matrices and LU factorization with partial pivoting.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Rows are stored densely over columns `i-kl ..= i+ku+kl`; the extra `kl`
/// slots on the right absorb fill-in from row interchanges.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    ab: Vec<C64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, ab: vec![C64::new(0.0, 0.0); n * width] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j + self.kl < i || j > i + self.ku {
            return C64::new(0.0, 0.0);
        }
        self.ab[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let mut acc = C64::new(0.0, 0.0);
            for j in j0..=j1 {
                acc += self.ab[self.slot(i, j)] * x[j];
            }
            *yi = acc;
        }
        y
    }

    /// Gaussian elimination with row pivoting restricted to the band.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku, w) = (self.kl, self.ku, self.width);
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.slot(k, k)].norm();
            for i in k + 1..=last {
                let v = self.ab[self.slot(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot in column {k} of banded factorization")));
            }
            piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.slot(k, k)];
            let rk = k * w + kl - k;
            for i in k + 1..=last {
                let si = self.slot(i, k);
                let l = self.ab[si] / pivot;
                self.ab[si] = l;
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let ri = i * w + kl - i;
                for j in k + 1..=jmax {
                    let u = self.ab[rk + j];
                    self.ab[ri + j] -= l * u;
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// Factored band matrix.
#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let m = &self.m;
        let n = m.n;
        assert_eq!(b.len(), n);
        let (kl, ku, w) = (m.kl, m.ku, m.width);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk == C64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= m.ab[i * w + kl + k - i] * bk;
            }
        }
        for i in (0..n).rev() {
            let ri = i * w + kl - i;
            let mut acc = b[i];
            for j in i + 1..=(i + ku + kl).min(n - 1) {
                acc -= m.ab[ri + j] * b[j];
            }
            b[i] = acc / m.ab[ri + i];
        }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
