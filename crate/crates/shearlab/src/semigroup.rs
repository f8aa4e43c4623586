//! Finite-dimensional decay certification: the discretized generator k L_{k,nu},
//! imaginary-axis resolvent scans, propagator norms and the C0 M^2 e^{-mu t} envelope.

use faer::complex_native::c64;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::coupled::CoupledOperator;
use crate::numerics::dense::{self, from_c64, to_c64, CMat};
use crate::numerics::expm::expm;
use crate::numerics::lanczos::largest_eigenvalue;
use crate::profile::{Discretization, ModeParams, ShearProfile};

/// sigma_min below this is reported as NearSingular.
pub const SINGULAR_FLOOR: f64 = 1e-13;
/// Default acceptance cap on C0_required.
pub const DEFAULT_C0_CAP: f64 = 10.0;
/// Golden-section refinements around each local minimum of the lambda scan.
const REFINE_STEPS: usize = 40;
const LANCZOS_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Structure {
    disc: Discretization,
    k: f64,
    nu: f64,
}

/// Dense generator with optional banded-plus-Poisson structure for fast resolvent norms.
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    pub a: CMat,
    pub mode: Option<ModeParams>,
    pub grid: Option<Grid>,
    structure: Option<Structure>,
}

impl GeneratorMatrix {
    /// Unstructured generator (test matrices).
    pub fn from_matrix(a: CMat) -> Result<Self> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::InvalidArgument("generator must be a nonempty square matrix".into()));
        }
        Ok(GeneratorMatrix { a, mode: None, grid: None, structure: None })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Max over b of |k b| on the grid (0 for unstructured generators).
    pub fn advection_bound(&self) -> f64 {
        self.structure.as_ref().map_or(0.0, |s| s.k.abs() * s.disc.max_abs_b())
    }

    /// i lambda - A as a coupled operator: a = -nu, d = i(lambda + k b), c = -i k b''.
    fn shifted(&self, lambda: f64) -> Option<CoupledOperator> {
        self.structure.as_ref().map(|s| {
            let d = s.disc.s.b.iter().map(|b| C64::new(0.0, lambda + s.k * b)).collect();
            let c = s.disc.s.bpp.iter().map(|v| C64::new(0.0, -s.k * v)).collect();
            CoupledOperator::new(s.disc.grid.h, s.k.abs(), C64::new(-s.nu, 0.0), d, c)
        })
    }

    /// sigma_min(i lambda - A).
    pub fn sigma_min(&self, lambda: f64) -> Result<f64> {
        match self.shifted(lambda) {
            Some(op) => {
                let lu = op.factor()?;
                let lu_h = op.factor_adjoint()?;
                let n = self.n();
                let top = largest_eigenvalue(n, |x| Ok(lu_h.solve(&lu.solve(x).0).0), n.min(300), LANCZOS_TOL)?;
                Ok(1.0 / top.sqrt())
            }
            None => {
                let n = self.n();
                let m = Mat::from_fn(n, n, |i, j| {
                    let v = -self.a.read(i, j) + if i == j { c64::new(0.0, lambda) } else { c64::new(0.0, 0.0) };
                    v
                });
                Ok(dense::sigma_min(&m))
            }
        }
    }
}

/// A = nu D2 - ik diag(b) + ik diag(b'') G_k with Dirichlet truncation.
pub fn discretize_generator(p: &ShearProfile, mode: &ModeParams, grid: &Grid) -> Result<GeneratorMatrix> {
    crate::airy::check_resolution(grid, mode.eps)?;
    let disc = Discretization::new(p, grid.clone());
    let k = mode.kf();
    let nu = mode.nu;
    let n = grid.n;
    let h2 = grid.h * grid.h;
    let poisson = crate::numerics::poisson::PoissonFactor::new(n, grid.h, k.abs());
    let g = crate::numerics::coupled::dense_green(&poisson);
    let a = Mat::from_fn(n, n, |i, j| {
        let mut v = C64::new(0.0, k * disc.s.bpp[i]) * from_c64(g.read(i, j));
        if i == j {
            v += C64::new(-2.0 * nu / h2, -k * disc.s.b[i]);
        } else if i + 1 == j || j + 1 == i {
            v += nu / h2;
        }
        to_c64(v)
    });
    Ok(GeneratorMatrix { a, mode: Some(*mode), grid: Some(grid.clone()), structure: Some(Structure { disc, k, nu }) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventScan {
    pub mu: f64,
    pub lambda_min: f64,
    /// (lambda, sigma_min) over the initial grid and all refinement points, sorted by lambda.
    pub samples: Vec<(f64, f64)>,
    /// sigma_min / |lambda| at the two outer points, checking linear growth.
    pub outer_growth: (f64, f64),
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, out: &mut Vec<(f64, f64)>) -> Result<()> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    out.push((c, fc));
    out.push((d, fd));
    for _ in 0..REFINE_STEPS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
            out.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
            out.push((d, fd));
        }
    }
    Ok(())
}

/// mu = min over the lambda grid of sigma_min(i lambda - A), with golden-section
/// refinement around every local minimum of the grid values.
pub fn resolvent_scan(g: &GeneratorMatrix, lambdas: &[f64]) -> Result<ResolventScan> {
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("lambda grid needs at least 3 increasing points".into()));
    }
    let coarse: Vec<f64> = lambdas.par_iter().map(|&l| g.sigma_min(l)).collect::<Result<_>>()?;
    let mut samples: Vec<(f64, f64)> = lambdas.iter().cloned().zip(coarse.iter().cloned()).collect();
    let n = lambdas.len();
    let minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || coarse[i] <= coarse[i - 1];
            let right = i + 1 == n || coarse[i] <= coarse[i + 1];
            left && right
        })
        .collect();
    let f = |l: f64| g.sigma_min(l);
    let refined: Vec<Vec<(f64, f64)>> = minima
        .par_iter()
        .map(|&i| {
            let a = lambdas[i.saturating_sub(1)];
            let b = lambdas[(i + 1).min(n - 1)];
            let mut out = Vec::new();
            golden_min(&f, a, b, &mut out)?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    for r in refined {
        samples.extend(r);
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lambda_min, mu) = samples.iter().cloned().fold((f64::NAN, f64::INFINITY), |acc, s| if s.1 < acc.1 { s } else { acc });
    if mu < SINGULAR_FLOOR {
        return Err(Error::NearSingular { sigma: mu, lambda: lambda_min });
    }
    let outer_growth = (coarse[0] / lambdas[0].abs().max(1e-300), coarse[n - 1] / lambdas[n - 1].abs().max(1e-300));
    Ok(ResolventScan { mu, lambda_min, samples, outer_growth })
}

/// Symmetric lambda grid on [-L, L] with L = 2 max|k b| + 1 + margin.
pub fn default_lambda_grid(g: &GeneratorMatrix, margin: f64, points: usize) -> Vec<f64> {
    let big = 2.0 * g.advection_bound() + 1.0 + margin;
    Grid::new(-big, big, points.max(3)).nodes()
}

/// ||e^{A t}|| (spectral norm) at uniformly spaced times t_j = j dt, j = 0..=steps,
/// by repeated products of exp(A dt).
pub fn semigroup_norm_curve(g: &GeneratorMatrix, dt: f64, steps: usize) -> Result<Vec<(f64, f64)>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let step = expm(&g.a, dt)?;
    let n = g.n();
    let mut p = dense::identity(n);
    let mut out = vec![(0.0, 1.0)];
    for j in 1..=steps {
        p = &step * &p;
        out.push((j as f64 * dt, spectral_norm(&p)?));
    }
    Ok(out)
}

/// Largest singular value by Lanczos on P^H P.
pub fn spectral_norm(p: &CMat) -> Result<f64> {
    let n = p.ncols();
    let top = largest_eigenvalue(n, |x| Ok(dense::adjoint_matvec(p, &dense::matvec(p, x))), n.min(300), LANCZOS_TOL)?;
    Ok(top.max(0.0).sqrt())
}

/// Measured constants of the decay envelope ||e^{At}|| <= C0 M^2 e^{-mu t}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DsrReport {
    /// max over sampled t of ||e^{At}||.
    pub m: f64,
    pub mu: f64,
    /// max_t ||e^{At}|| e^{mu t} / M^2.
    pub c0_required: f64,
    pub lambda_min: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub cap: f64,
    pub pass: bool,
}

pub fn dsr_envelope_check(g: &GeneratorMatrix, dt: f64, steps: usize, lambdas: &[f64], cap: f64) -> Result<DsrReport> {
    let scan = resolvent_scan(g, lambdas)?;
    let curve = semigroup_norm_curve(g, dt, steps)?;
    let m = curve.iter().map(|c| c.1).fold(0.0, f64::max).max(1.0);
    let mu = scan.mu;
    let c0_required = curve.iter().map(|&(t, v)| v * (mu * t).exp() / (m * m)).fold(0.0, f64::max);
    Ok(DsrReport {
        m,
        mu,
        c0_required,
        lambda_min: scan.lambda_min,
        times: curve.iter().map(|c| c.0).collect(),
        norms: curve.iter().map(|c| c.1).collect(),
        lambdas: scan.samples.iter().map(|s| s.0).collect(),
        sigmas: scan.samples.iter().map(|s| s.1).collect(),
        cap,
        pass: c0_required <= cap,
    })
}
