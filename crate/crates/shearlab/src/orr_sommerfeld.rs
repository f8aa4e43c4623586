//! Orr-Sommerfeld resolvent eps w'' - alpha w + i(b(y0) - b) w + i b'' G_k w = f,
//! spectral density assembly, the profile Theta, the limiting-absorption scan and
//! the principal-value/delta limit check.

use std::f64::consts::PI;

use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{check_resolution, critical_spacing, AiryOperator, ResolventQuery};
use crate::diagnostics::gevrey_cutoff;
use crate::elliptic::{boundary_leakage, exp_convolution};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::coupled::CoupledOperator;
use crate::numerics::dense::{self, to_c64, CMat};
use crate::numerics::interp::lagrange4;
use crate::numerics::poisson::centered_difference;
use crate::numerics::quad;
use crate::profile::{invert_profile, Discretization, ModeParams, ShearProfile};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Residual above which a solve is reported as singular coupling.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStrategy {
    /// Interleaved banded system in (w, G_k w).
    #[default]
    Banded,
    /// Tridiagonal Airy factor plus a dense correction on supp b''.
    Woodbury,
    /// Global dense LU (oracle).
    Dense,
}

#[derive(Clone, Debug)]
pub struct OsSolution {
    pub w: Vec<C64>,
    pub psi: Vec<C64>,
    pub query: ResolventQuery,
    pub mode: ModeParams,
    /// ||M w - f||_inf / ||f||_inf.
    pub residual: f64,
}

/// The discrete coupled operator with a = eps, d = -alpha + i(b0 - b), c = i b''.
pub fn os_operator(disc: &Discretization, mode: &ModeParams, alpha: f64, b0: f64) -> CoupledOperator {
    let d = disc.s.b.iter().map(|b| C64::new(-alpha, b0 - b)).collect();
    let c = disc.s.bpp.iter().map(|v| C64::new(0.0, *v)).collect();
    CoupledOperator::new(disc.grid.h, mode.kf().abs(), C64::new(mode.eps, 0.0), d, c)
}

fn inf_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn singular(b0: f64, detail: impl Into<String>) -> Error {
    Error::CouplingSingular { w: b0, detail: detail.into() }
}

fn woodbury_solve(op: &CoupledOperator, disc: &Discretization, q: &ResolventQuery, b0: f64, f: &[C64]) -> Result<Vec<C64>> {
    let airy = AiryOperator::from_samples(q, &disc.grid, &disc.s.b, b0)?;
    let u = airy.solve(f);
    let support = &disc.support;
    let m = support.len();
    if m == 0 {
        return Ok(u);
    }
    let g = op.poisson();
    let gu = g.solve(&u);
    // T[r, s] = (G A^{-1} e_s)(y_r) c_s ; (I + T) psi_S = (G A^{-1} f)_S
    let mut t = Mat::<c64>::zeros(m, m);
    let mut cols = Vec::with_capacity(m);
    for (s, &js) in support.iter().enumerate() {
        let mut e = vec![ZERO; disc.n()];
        e[js] = C64::new(1.0, 0.0);
        let ae = airy.solve(&e);
        let gae = g.solve(&ae);
        for (r, &jr) in support.iter().enumerate() {
            let v = gae[jr] * op.c[js] + if r == s { C64::new(1.0, 0.0) } else { ZERO };
            t.write(r, s, to_c64(v));
        }
        cols.push(ae);
    }
    let rhs: Vec<C64> = support.iter().map(|&j| gu[j]).collect();
    let psi_s = dense::solve(&t, &rhs).map_err(|e| singular(b0, e.to_string()))?;
    let mut w = u;
    for (s, &js) in support.iter().enumerate() {
        let coef = op.c[js] * psi_s[s];
        for (wi, ai) in w.iter_mut().zip(&cols[s]) {
            *wi -= ai * coef;
        }
    }
    Ok(w)
}

/// Solve with an explicit reference value b0 = b(y0).
pub fn os_solve_at(
    disc: &Discretization,
    mode: &ModeParams,
    q: &ResolventQuery,
    b0: f64,
    f: &[C64],
    strategy: SolveStrategy,
) -> Result<OsSolution> {
    if (q.eps - mode.eps).abs() > 1e-12 * mode.eps.abs() {
        return Err(Error::InvalidArgument(format!("query eps {} differs from nu/k = {}", q.eps, mode.eps)));
    }
    if f.len() != disc.n() {
        return Err(Error::InvalidArgument(format!("forcing has {} samples, grid has {}", f.len(), disc.n())));
    }
    check_resolution(&disc.grid, q.eps)?;
    if boundary_leakage(f) {
        log::warn!("os_resolvent_solve: forcing does not decay at the grid ends");
    }
    let op = os_operator(disc, mode, q.alpha, b0);
    let w = match strategy {
        SolveStrategy::Banded => {
            let lu = op.factor().map_err(|e| singular(b0, e.to_string()))?;
            lu.solve(f).0
        }
        SolveStrategy::Woodbury => woodbury_solve(&op, disc, q, b0, f)?,
        SolveStrategy::Dense => dense::solve(&op.dense(), f).map_err(|e| singular(b0, e.to_string()))?,
    };
    if w.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular(b0, "non-finite solution"));
    }
    let (mw, psi) = op.apply_with_psi(&w);
    let den = inf_norm(f);
    let num = mw.iter().zip(f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let residual = if den == 0.0 { num } else { num / den };
    if residual > RESIDUAL_LIMIT {
        return Err(singular(b0, format!("relative residual {residual:.3e}")));
    }
    Ok(OsSolution { w, psi, query: *q, mode: *mode, residual })
}

/// (w, psi = G_k w) for the Orr-Sommerfeld resolvent at (eps, alpha, y0).
pub fn os_resolvent_solve(
    p: &ShearProfile,
    mode: &ModeParams,
    q: &ResolventQuery,
    disc: &Discretization,
    f: &[C64],
) -> Result<OsSolution> {
    os_solve_at(disc, mode, q, p.b(q.y0), f, SolveStrategy::Banded)
}

pub fn os_resolvent_solve_with(
    p: &ShearProfile,
    mode: &ModeParams,
    q: &ResolventQuery,
    disc: &Discretization,
    f: &[C64],
    strategy: SolveStrategy,
) -> Result<OsSolution> {
    os_solve_at(disc, mode, q, p.b(q.y0), f, strategy)
}

/// sup_xi <k,xi>^2 |psi^(xi)| together with the same quantity over the top half of
/// the resolved band (the flat tail).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StreamFlatness {
    pub sup: f64,
    pub tail_sup: f64,
    pub xi_max: f64,
}

/// Weighted spectrum of a stream function by direct transform on a zero-padded grid.
pub fn stream_flatness(grid: &Grid, k: f64, psi: &[C64]) -> StreamFlatness {
    use rustfft::FftPlanner;
    let n = (2 * grid.n).next_power_of_two();
    let mut buf = vec![ZERO; n];
    buf[..grid.n].copy_from_slice(psi);
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dxi = 2.0 * PI / (n as f64 * grid.h);
    let half = n / 2;
    let mut sup: f64 = 0.0;
    let mut tail: f64 = 0.0;
    for (j, z) in buf.iter().enumerate() {
        let m = if j <= half { j as f64 } else { j as f64 - n as f64 };
        let xi = m * dxi;
        let val = (1.0 + k * k + xi * xi) * z.norm() * grid.h / (2.0 * PI).sqrt();
        sup = sup.max(val);
        if m.abs() > 0.25 * n as f64 {
            tail = tail.max(val);
        }
    }
    StreamFlatness { sup, tail_sup: tail, xi_max: half as f64 * dxi }
}

/// Gaussian bump e^{-(y-c)^2/(2 s^2)} times a Gevrey cutoff equal to 1 on |y-c| <= r/2
/// and vanishing for |y-c| >= r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub center: f64,
    pub width: f64,
    pub radius: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData { center: 0.0, width: 0.5, radius: 3.0 }
    }
}

impl InitialData {
    pub fn gaussian_bump(center: f64, width: f64, radius: f64) -> Result<Self> {
        if !(width > 0.0 && radius > 0.0 && center.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad initial data: width {width}, radius {radius}")));
        }
        Ok(InitialData { center, width, radius })
    }

    pub fn omega0_at(&self, y: f64) -> f64 {
        let d = y - self.center;
        (-d * d / (2.0 * self.width * self.width)).exp() * gevrey_cutoff(2.0 * d.abs() / self.radius)
    }

    /// omega_0k sampled on a y-grid.
    pub fn omega0(&self, grid: &Grid) -> Vec<C64> {
        grid.sample(|y| C64::new(self.omega0_at(y), 0.0))
    }

    /// F_0k(v) = omega_0k(b^{-1}(v)) sampled on a v-grid.
    pub fn f0(&self, p: &ShearProfile, vgrid: &Grid) -> Result<Vec<C64>> {
        vgrid.nodes().into_iter().map(|v| Ok(C64::new(self.omega0_at(invert_profile(p, v)?), 0.0))).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    /// Requires the support to sit strictly inside the grid.
    pub fn check_inside(&self, grid: &Grid) -> Result<()> {
        let (a, b) = self.support();
        if a <= grid.lo + grid.h || b >= grid.hi() - grid.h {
            return Err(Error::InvalidArgument(format!(
                "initial data support [{a}, {b}] is not inside the grid interior [{}, {}]",
                grid.lo,
                grid.hi()
            )));
        }
        Ok(())
    }
}

/// Column solver for the spectral density at alpha = 0: w = b(y0) -> (omega, psi)(., y0).
pub struct DensityColumns<'a> {
    pub disc: &'a Discretization,
    pub mode: ModeParams,
    pub rhs: Vec<C64>,
    p: &'a ShearProfile,
    strategy: SolveStrategy,
}

impl<'a> DensityColumns<'a> {
    pub fn new(p: &'a ShearProfile, mode: ModeParams, disc: &'a Discretization, init: &InitialData) -> Result<Self> {
        check_resolution(&disc.grid, mode.eps)?;
        init.check_inside(&disc.grid)?;
        Ok(DensityColumns { disc, mode, rhs: init.omega0(&disc.grid), p, strategy: SolveStrategy::Banded })
    }

    pub fn with_strategy(mut self, strategy: SolveStrategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn solve(&self, w: f64) -> Result<OsSolution> {
        let y0 = invert_profile(self.p, w)?;
        let q = ResolventQuery::new(self.mode.eps, 0.0, y0)?;
        os_solve_at(self.disc, &self.mode, &q, w, &self.rhs, self.strategy).map_err(|e| e.context(format!("y0 = {y0:.6}")))
    }
}

/// Omega, Pi and Theta on uniform (v, w) grids; stored column-major as `[iw][iv]`.
#[derive(Clone, Debug)]
pub struct SpectralDensityField {
    pub vgrid: Grid,
    pub wgrid: Grid,
    pub omega: Vec<Vec<C64>>,
    pub pi: Vec<Vec<C64>>,
    /// Theta(v, w) = Pi(v + w, w).
    pub theta: Vec<Vec<C64>>,
    pub mode: ModeParams,
    pub initial: InitialData,
}

/// Cached y = b^{-1}(u) on a uniform u-grid, interpolated.
struct InverseTable {
    grid: Grid,
    y: Vec<C64>,
}

impl InverseTable {
    fn new(p: &ShearProfile, lo: f64, hi: f64, h: f64) -> Result<Self> {
        let grid = Grid::with_spacing(lo - 2.0 * h, hi + 2.0 * h, h);
        let y = grid.nodes().into_iter().map(|u| invert_profile(p, u).map(|y| C64::new(y, 0.0))).collect::<Result<_>>()?;
        Ok(InverseTable { grid, y })
    }

    fn eval(&self, u: f64) -> f64 {
        lagrange4(&self.y, self.grid.lo, self.grid.h, u).re
    }
}

/// Assembles Omega, Pi on (vgrid x wgrid) from y-grid solves at alpha = 0 and Theta by
/// interpolation at shifted arguments.
pub fn spectral_density(
    p: &ShearProfile,
    mode: &ModeParams,
    init: &InitialData,
    disc: &Discretization,
    vgrid: &Grid,
    wgrid: &Grid,
) -> Result<SpectralDensityField> {
    let cols = DensityColumns::new(p, *mode, disc, init)?;
    let h = vgrid.h.min(wgrid.h).min(disc.grid.h);
    let table = InverseTable::new(p, vgrid.lo.min(vgrid.lo + wgrid.lo), vgrid.hi().max(vgrid.hi() + wgrid.hi()), h)?;
    let ylo = disc.grid.lo;
    let yh = disc.grid.h;
    let results: Vec<Result<(Vec<C64>, Vec<C64>, Vec<C64>)>> = (0..wgrid.n)
        .into_par_iter()
        .map(|iw| {
            let w = wgrid.x(iw);
            let sol = cols.solve(w)?;
            let at = |f: &[C64], v: f64| lagrange4(f, ylo, yh, table.eval(v));
            let vs = vgrid.nodes();
            let omega = vs.iter().map(|&v| at(&sol.w, v)).collect();
            let pi = vs.iter().map(|&v| at(&sol.psi, v)).collect();
            let theta = vs.iter().map(|&v| at(&sol.psi, v + w)).collect();
            Ok((omega, pi, theta))
        })
        .collect();
    let mut field = SpectralDensityField {
        vgrid: vgrid.clone(),
        wgrid: wgrid.clone(),
        omega: Vec::with_capacity(wgrid.n),
        pi: Vec::with_capacity(wgrid.n),
        theta: Vec::with_capacity(wgrid.n),
        mode: *mode,
        initial: *init,
    };
    for r in results {
        let (o, pcol, t) = r?;
        field.omega.push(o);
        field.pi.push(pcol);
        field.theta.push(t);
    }
    Ok(field)
}

impl SpectralDensityField {
    /// Theta on another v-grid by interpolation of the stored columns.
    pub fn theta_on(&self, vgrid: &Grid) -> Vec<Vec<C64>> {
        self.theta
            .iter()
            .map(|col| vgrid.nodes().into_iter().map(|v| lagrange4(col, self.vgrid.lo, self.vgrid.h, v)).collect())
            .collect()
    }

    /// CSV rows (v, w, Re Omega, Im Omega, Re Theta, Im Theta).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("v,w,re_omega,im_omega,re_theta,im_theta\n");
        for iw in 0..self.wgrid.n {
            for iv in 0..self.vgrid.n {
                let (o, t) = (self.omega[iw][iv], self.theta[iw][iv]);
                s.push_str(&format!(
                    "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}\n",
                    self.vgrid.x(iv),
                    self.wgrid.x(iw),
                    o.re,
                    o.im,
                    t.re,
                    t.im
                ));
            }
        }
        s
    }
}

/// Theta(., w) from the integral form, with the forcing and the H^1_k ratio.
#[derive(Clone, Debug)]
pub struct ThetaColumn {
    pub w: f64,
    pub y0: f64,
    /// v_j = b(y_j) - w.
    pub v: Vec<f64>,
    pub theta: Vec<C64>,
    pub forcing: Vec<C64>,
    /// ||Theta||_{H^1_k} / ||F||_{H^1_k} in the v variable.
    pub h1_ratio: f64,
}

/// H^1_k norm in v of a y-grid function: k^2 int |g|^2 b' dy + int |g_y|^2 / b' dy.
pub fn h1k_norm_v(disc: &Discretization, k: f64, g: &[C64]) -> f64 {
    let dg = centered_difference(g, disc.grid.h);
    let mut s = 0.0;
    for j in 0..disc.n() {
        let bp = disc.s.bp[j];
        s += k * k * g[j].norm_sqr() * bp + dg[j].norm_sqr() / bp;
    }
    (s * disc.grid.h).sqrt()
}

/// Solves Theta + G_k[ k_eps (dB*/B*)(rho + w) Theta(rho) / (rho + i eps^{1/3}) ] i drho = F,
/// F = G_k A^{-1} omega_0, with kernels from the (v, rho; w) Airy kernel and G_k the
/// explicit exponential Green's function.
pub fn theta_integral_solve(
    p: &ShearProfile,
    mode: &ModeParams,
    init: &InitialData,
    disc: &Discretization,
    w: f64,
) -> Result<ThetaColumn> {
    init.check_inside(&disc.grid)?;
    let y0 = invert_profile(p, w)?;
    let q = ResolventQuery::new(mode.eps, 0.0, y0)?;
    let airy = AiryOperator::from_samples(&q, &disc.grid, &disc.s.b, w)?;
    let kappa = mode.kf().abs();
    let grid = &disc.grid;
    let f0 = init.omega0(grid);
    let forcing = exp_convolution(kappa, grid, &airy.solve(&f0));
    let support = &disc.support;
    let m = support.len();
    let layer = C64::new(0.0, mode.eps.abs().cbrt() * mode.eps.signum());
    let mut gk = Vec::with_capacity(m);
    for &js in support {
        let rho = disc.s.b[js] - w;
        let col = crate::airy::airy_kernel_vw(p, mode, disc, rho, w)?;
        debug_assert_eq!(col.source_index, js);
        let coef = I * (disc.s.bpp[js] / disc.s.bp[js]) * grid.h / (rho + layer);
        let u = exp_convolution(kappa, grid, &col.values);
        gk.push(u.into_iter().map(|z| z * coef).collect::<Vec<_>>());
    }
    let theta = if m == 0 {
        forcing.clone()
    } else {
        let t = Mat::from_fn(m, m, |r, s| {
            let v = gk[s][support[r]] + if r == s { C64::new(1.0, 0.0) } else { ZERO };
            to_c64(v)
        });
        let rhs: Vec<C64> = support.iter().map(|&j| forcing[j]).collect();
        let ts = dense::solve(&t, &rhs).map_err(|e| e.context(format!("theta integral form at w = {w:.6}")))?;
        let mut theta = forcing.clone();
        for (s, col) in gk.iter().enumerate() {
            for (th, g) in theta.iter_mut().zip(col) {
                *th -= g * ts[s];
            }
        }
        theta
    };
    let h1_ratio = h1k_norm_v(disc, kappa, &theta) / h1k_norm_v(disc, kappa, &forcing);
    Ok(ThetaColumn { w, y0, v: disc.s.b.iter().map(|b| b - w).collect(), theta, forcing, h1_ratio })
}

/// One point of the limiting-absorption scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LapPoint {
    pub eps: f64,
    pub alpha: f64,
    pub y0: f64,
    /// Smallest H^1_k singular value of psi -> psi + T(i b'' psi), capped at 1.
    pub kappa: f64,
    /// H^1_k operator norm of psi -> T(i b'' psi).
    pub coupling_norm: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LapScanReport {
    pub points: Vec<LapPoint>,
    pub kappa_min: f64,
    /// (eps, min kappa over alpha and y0) in scan order.
    pub per_eps_min: Vec<(f64, f64)>,
    /// max / min of the per-eps minima.
    pub eps_variation: f64,
    pub coupling_norm_max: f64,
}

/// Scan parameters; alpha = factor * eps for each factor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LapScanSpec {
    pub k: i32,
    pub eps: Vec<f64>,
    pub alpha_over_eps: Vec<f64>,
    pub y0: Vec<f64>,
    pub half_width: f64,
}

/// Lower bidiagonal Cholesky factor of h (k^2 - D2) (Dirichlet): diagonal and subdiagonal.
fn h1_cholesky(n: usize, h: f64, k: f64) -> (Vec<f64>, Vec<f64>) {
    let d0 = h * k * k + 2.0 / h;
    let off = -1.0 / h;
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n.saturating_sub(1)];
    diag[0] = d0.sqrt();
    for i in 1..n {
        sub[i - 1] = off / diag[i - 1];
        diag[i] = (d0 - sub[i - 1] * sub[i - 1]).sqrt();
    }
    (diag, sub)
}

/// kappa and the coupling norm at one (eps, alpha, y0).
pub fn lap_kappa_point(p: &ShearProfile, k: i32, disc: &Discretization, q: &ResolventQuery) -> Result<LapPoint> {
    let support = &disc.support;
    let m = support.len();
    let point = |kappa, coupling_norm| LapPoint { eps: q.eps, alpha: q.alpha, y0: q.y0, kappa, coupling_norm };
    if m == 0 {
        return Ok(point(1.0, 0.0));
    }
    let n = disc.n();
    let h = disc.grid.h;
    let kf = (k as f64).abs();
    let airy = AiryOperator::new(p, q, disc)?;
    let poisson = crate::numerics::poisson::PoissonFactor::new(n, h, kf);
    let (ld, ls) = h1_cholesky(n, h, kf);
    // X = L^T U with U = G A^{-1} P_S^T ; Y = L^{-1} V^H with V = diag(i b''_S) P_S
    let mut basis = Mat::<c64>::zeros(n, 2 * m);
    for (s, &js) in support.iter().enumerate() {
        let mut e = vec![ZERO; n];
        e[js] = C64::new(1.0, 0.0);
        let u = poisson.solve(&airy.solve(&e));
        for i in 0..n {
            let v = ld[i] * u[i] + if i + 1 < n { ls[i] * u[i + 1] } else { ZERO };
            basis.write(i, s, to_c64(v));
        }
        let mut y = vec![ZERO; n];
        let cj = C64::new(0.0, disc.s.bpp[js]).conj();
        for i in js..n {
            let rhs = if i == js { cj } else { ZERO } - if i > js { y[i - 1] * ls[i - 1] } else { ZERO };
            y[i] = rhs / ld[i];
        }
        for i in 0..n {
            basis.write(i, m + s, to_c64(y[i]));
        }
    }
    let qm = basis.qr().compute_thin_q();
    let r = qm.ncols();
    let x = basis.subcols(0, m);
    let yv = basis.subcols(m, m);
    let qx = qm.adjoint() * x;
    let qy = qm.adjoint() * yv;
    let b: CMat = &qx * qy.adjoint();
    let sigma_b = dense::sigma_max(&b);
    let ipb = Mat::from_fn(r, r, |i, j| b.read(i, j) + if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    let smin = dense::sigma_min(&ipb);
    let kappa = if n > r { smin.min(1.0) } else { smin };
    Ok(point(kappa, sigma_b))
}

/// Dense oracle: sigma_min(L^T (I + G A^{-1} diag(i b'')) L^{-T}) and the norm of the
/// coupling part.
pub fn lap_kappa_dense(p: &ShearProfile, k: i32, disc: &Discretization, q: &ResolventQuery) -> Result<(f64, f64)> {
    let n = disc.n();
    let h = disc.grid.h;
    let kf = (k as f64).abs();
    let airy = AiryOperator::new(p, q, disc)?;
    let poisson = crate::numerics::poisson::PoissonFactor::new(n, h, kf);
    let (ld, ls) = h1_cholesky(n, h, kf);
    let lt = Mat::from_fn(n, n, |i, j| {
        let v = if i == j {
            ld[i]
        } else if j == i + 1 {
            ls[i]
        } else {
            0.0
        };
        c64::new(v, 0.0)
    });
    let lt_inv = dense::identity(n);
    let lt_inv = lt.partial_piv_lu().solve(&lt_inv);
    let mut e = Mat::<c64>::zeros(n, n);
    for j in 0..n {
        let c = disc.s.bpp[j];
        if c == 0.0 {
            continue;
        }
        let mut col = vec![ZERO; n];
        col[j] = C64::new(0.0, c);
        let u = poisson.solve(&airy.solve(&col));
        for i in 0..n {
            e.write(i, j, to_c64(u[i]));
        }
    }
    let e = &lt * &e * &lt_inv;
    let m = Mat::from_fn(n, n, |i, j| e.read(i, j) + if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) });
    Ok((dense::sigma_min(&m), dense::sigma_max(&e)))
}

pub fn lap_kappa_scan(p: &ShearProfile, spec: &LapScanSpec) -> Result<LapScanReport> {
    if spec.eps.is_empty() || spec.alpha_over_eps.is_empty() || spec.y0.is_empty() {
        return Err(Error::InvalidArgument("lap scan grids must be nonempty".into()));
    }
    if spec.alpha_over_eps.iter().any(|a| *a < 0.0) {
        return Err(Error::SignViolation(spec.alpha_over_eps.iter().cloned().fold(0.0, f64::min)));
    }
    let mut points = Vec::new();
    let mut per_eps_min = Vec::new();
    for &eps in &spec.eps {
        let grid = Grid::symmetric(spec.half_width, critical_spacing(eps));
        let disc = Discretization::new(p, grid);
        let queries: Vec<ResolventQuery> = spec
            .alpha_over_eps
            .iter()
            .flat_map(|&a| spec.y0.iter().map(move |&y0| (a * eps, y0)))
            .map(|(alpha, y0)| ResolventQuery::new(eps, alpha, y0))
            .collect::<Result<_>>()?;
        let pts: Vec<LapPoint> =
            queries.par_iter().map(|q| lap_kappa_point(p, spec.k, &disc, q)).collect::<Result<Vec<_>>>()?;
        per_eps_min.push((eps, pts.iter().map(|x| x.kappa).fold(f64::INFINITY, f64::min)));
        points.extend(pts);
    }
    let kappa_min = per_eps_min.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let kmax = per_eps_min.iter().map(|x| x.1).fold(0.0, f64::max);
    let coupling_norm_max = points.iter().map(|x| x.coupling_norm).fold(0.0, f64::max);
    Ok(LapScanReport { points, kappa_min, per_eps_min, eps_variation: kmax / kappa_min, coupling_norm_max })
}

/// int w_{eps,alpha} phi against the principal-value plus delta limit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitReport {
    pub y0: f64,
    pub eps: Vec<f64>,
    pub values: Vec<C64>,
    /// P.V. int f phi / (b - b(y0)).
    pub principal_value: f64,
    /// pi f(y0) phi(y0) / b'(y0).
    pub delta_weight: f64,
    /// Limit for eps -> 0+; the eps -> 0- limit has the opposite real part.
    pub limit_plus: C64,
    pub limit_minus: C64,
    pub errors: Vec<f64>,
    pub decreasing: bool,
    pub final_error: f64,
    /// Sign of Re of every value matches the delta branch selected by sign(eps).
    pub sign_consistent: bool,
}

/// Principal value of int g(y) / (b(y) - b(y0)) dy by symmetric pairing around y0.
pub fn principal_value<G: Fn(f64) -> f64>(p: &ShearProfile, g: G, y0: f64, reach: f64) -> f64 {
    let b0 = p.b(y0);
    let pair = |s: f64| {
        let up = g(y0 + s) / (p.b(y0 + s) - b0);
        let dn = g(y0 - s) / (p.b(y0 - s) - b0);
        C64::new(up + dn, 0.0)
    };
    let breaks: Vec<f64> = (0..=64).map(|i| reach * i as f64 / 64.0).collect();
    quad::integrate_panels(pair, &breaks, 1e-14, 1e-12).value.re
}

/// Runs the Airy resolvent with alpha = eps along `eps_seq` (all of one sign) for
/// forcing f and test function phi and compares with the distributional limit.
pub fn pv_delta_limit_check<F, P>(
    p: &ShearProfile,
    f: F,
    phi: P,
    y0: f64,
    eps_seq: &[f64],
    half_width: f64,
) -> Result<LimitReport>
where
    F: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    if eps_seq.is_empty() {
        return Err(Error::InvalidArgument("empty eps sequence".into()));
    }
    let sign = eps_seq[0].signum();
    if eps_seq.iter().any(|e| e.signum() != sign) {
        return Err(Error::InvalidArgument("eps sequence must have one sign".into()));
    }
    let pv = principal_value(p, |y| f(y) * phi(y), y0, half_width - y0.abs());
    let delta = PI * f(y0) * phi(y0) / p.bp(y0);
    let limit_plus = C64::new(-delta, pv);
    let limit_minus = C64::new(delta, pv);
    let limit = if sign > 0.0 { limit_plus } else { limit_minus };
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for &eps in eps_seq {
        let grid = Grid::symmetric(half_width, critical_spacing(eps).min(0.02));
        let disc = Discretization::new(p, grid);
        let q = ResolventQuery::new(eps, eps, y0)?;
        let op = AiryOperator::new(p, &q, &disc)?;
        let rhs = disc.grid.sample(|y| C64::new(f(y), 0.0));
        let w = op.solve(&rhs);
        let wp: Vec<C64> = w.iter().zip(disc.grid.nodes()).map(|(z, y)| z * phi(y)).collect();
        let val = disc.grid.trapezoid(&wp);
        errors.push((val - limit).norm() / limit.norm());
        values.push(val);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let sign_consistent = delta == 0.0 || values.iter().all(|v| v.re.signum() == -sign * delta.signum());
    Ok(LimitReport {
        y0,
        eps: eps_seq.to_vec(),
        values,
        principal_value: pv,
        delta_weight: delta,
        limit_plus,
        limit_minus,
        final_error: *errors.last().unwrap(),
        errors,
        decreasing,
        sign_consistent,
    })
}
