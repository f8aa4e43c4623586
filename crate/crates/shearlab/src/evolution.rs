//! Linear evolution of a single Fourier mode: the spectral representation, a
//! Crank-Nicolson time stepper on the same discrete operator, the Couette closed form,
//! and profile extraction.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::check_resolution;
use crate::error::{Error, Result};
use crate::grid::{rel_l2_diff, Grid};
use crate::numerics::coupled::CoupledOperator;
use crate::numerics::interp::lagrange4;
use crate::numerics::poisson::PoissonFactor;
use crate::numerics::special::cisi;
use crate::orr_sommerfeld::{DensityColumns, InitialData};
use crate::profile::{invert_profile, Discretization, ModeParams, ShearProfile};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest admissible |k| t_max dw.
pub const PHASE_LIMIT: f64 = 0.1;
/// Largest admissible dt |k| max|b|.
pub const STEP_LIMIT: f64 = 0.1;
/// The w-integral is split into this many contiguous blocks; the reduction order is
/// fixed so results do not depend on the thread count.
const BLOCKS: usize = 16;

/// Profiles F_k(t, v) = f_k(t, v) e^{ikvt} and Phi_k on a uniform v-grid.
#[derive(Clone, Debug)]
pub struct Profiles {
    pub vgrid: Grid,
    pub f_t: Vec<Vec<C64>>,
    pub phi_t: Vec<Vec<C64>>,
}

/// omega_k(t, y), psi_k(t, y) on a y-grid at the sampled times.
#[derive(Clone, Debug)]
pub struct EvolutionSeries {
    pub times: Vec<f64>,
    pub grid: Grid,
    pub omega_t: Vec<Vec<C64>>,
    pub psi_t: Vec<Vec<C64>>,
    pub profiles: Option<Profiles>,
    pub mode: ModeParams,
}

fn check_times(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("no sample times".into()));
    }
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be finite, nonnegative and nondecreasing".into()));
    }
    Ok(*times.last().unwrap())
}

/// Phase-resolution number |k| t_max dw.
pub fn phase_number(k: f64, t_max: f64, dw: f64) -> f64 {
    k.abs() * t_max * dw
}

// J_n(a, A) = int_A^inf e^{-iax} x^{-n} dx, n = 1, 2, 3, for a != 0.
fn tail_j(a: f64, big: f64) -> [C64; 3] {
    let x = a.abs() * big;
    let (ci, si) = cisi(x);
    let j1 = C64::new(-ci, -a.signum() * (0.5 * PI - si));
    let e = C64::from_polar(1.0, -a * big);
    let j2 = e / big - I * a * j1;
    let j3 = e / (2.0 * big * big) - I * (a / 2.0) * j2;
    [j1, j2, j3]
}

/// int over w outside [w_lo, w_hi] of e^{-ikwt} g(w - v), with
/// g(x) = a1/(ix) + c2/x^2 + c3/x^3 matched to the end values of the column.
fn tail_integral(k: f64, t: f64, v: f64, wlo: f64, whi: f64, a1: C64, end_lo: C64, end_hi: C64) -> C64 {
    let big_a = whi - v;
    let big_b = v - wlo;
    let rp = end_hi - a1 / (I * big_a);
    let rm = end_lo + a1 / (I * big_b);
    let c3 = (rp * big_a * big_a - rm * big_b * big_b) * (big_a * big_b / (big_a + big_b));
    let c2 = rp * big_a * big_a - c3 / big_a;
    let a = k * t;
    let (s1, s2, s3) = if a == 0.0 {
        (
            C64::new((big_b / big_a).ln(), -k.signum() * PI),
            C64::new(1.0 / big_a + 1.0 / big_b, 0.0),
            C64::new(0.5 / (big_a * big_a) - 0.5 / (big_b * big_b), 0.0),
        )
    } else {
        let ja = tail_j(a, big_a);
        let jb = tail_j(-a, big_b);
        (ja[0] - jb[0], ja[1] + jb[1], ja[2] - jb[2])
    };
    C64::from_polar(1.0, -a * v) * (a1 / I * s1 + c2 * s2 + c3 * s3)
}

struct BlockSums {
    omega: Vec<Vec<C64>>,
    psi: Vec<Vec<C64>>,
    first: Option<(Vec<C64>, Vec<C64>)>,
    last: Option<(Vec<C64>, Vec<C64>)>,
}

/// f_k(t, .) = -(1/2 pi) e^{-nu k^2 t} int e^{-ikwt} Omega(., w) dw by the trapezoid rule on
/// `wgrid` plus asymptotic tails, and psi_k from the matching Pi columns. Columns are
/// solved in parallel and streamed into the time sums, so the field is never stored.
pub fn evolve_representation(
    p: &ShearProfile,
    mode: &ModeParams,
    init: &InitialData,
    disc: &Discretization,
    wgrid: &Grid,
    times: &[f64],
) -> Result<EvolutionSeries> {
    let t_max = check_times(times)?;
    let k = mode.kf();
    let phase = phase_number(k, t_max, wgrid.h);
    if phase > PHASE_LIMIT {
        return Err(Error::PhaseUnderresolved(phase));
    }
    let (vmin, vmax) = (disc.s.b[0], disc.s.b[disc.n() - 1]);
    if !(wgrid.lo < vmin && wgrid.hi() > vmax) {
        return Err(Error::InvalidArgument(format!(
            "w-grid [{}, {}] must strictly contain the v-range [{vmin}, {vmax}]",
            wgrid.lo,
            wgrid.hi()
        )));
    }
    let cols = DensityColumns::new(p, *mode, disc, init)?;
    let n = disc.n();
    let nt = times.len();
    let nw = wgrid.n;
    let per = nw.div_ceil(BLOCKS);
    let blocks: Vec<Result<BlockSums>> = (0..BLOCKS)
        .into_par_iter()
        .map(|b| {
            let mut out = BlockSums { omega: vec![vec![ZERO; n]; nt], psi: vec![vec![ZERO; n]; nt], first: None, last: None };
            for iw in (b * per)..((b + 1) * per).min(nw) {
                let w = wgrid.x(iw);
                let sol = cols.solve(w)?;
                let weight = if iw == 0 || iw == nw - 1 { 0.5 * wgrid.h } else { wgrid.h };
                for (it, &t) in times.iter().enumerate() {
                    let c = C64::from_polar(weight, -k * w * t);
                    for (acc, z) in out.omega[it].iter_mut().zip(&sol.w) {
                        *acc += c * z;
                    }
                    for (acc, z) in out.psi[it].iter_mut().zip(&sol.psi) {
                        *acc += c * z;
                    }
                }
                if iw == 0 {
                    out.first = Some((sol.w.clone(), sol.psi.clone()));
                }
                if iw == nw - 1 {
                    out.last = Some((sol.w, sol.psi));
                }
            }
            Ok(out)
        })
        .collect();
    let mut omega = vec![vec![ZERO; n]; nt];
    let mut psi = vec![vec![ZERO; n]; nt];
    let mut first = None;
    let mut last = None;
    for blk in blocks {
        let blk = blk?;
        for it in 0..nt {
            for j in 0..n {
                omega[it][j] += blk.omega[it][j];
                psi[it][j] += blk.psi[it][j];
            }
        }
        first = first.or(blk.first);
        last = last.or(blk.last);
    }
    let (first, last) = (first.expect("first column"), last.expect("last column"));
    let omega0 = init.omega0(&disc.grid);
    let psi0 = PoissonFactor::new(n, disc.grid.h, k.abs()).solve(&omega0);
    let (wlo, whi) = (wgrid.lo, wgrid.hi());
    for (it, &t) in times.iter().enumerate() {
        let scale = -dissipation_factor(mode, t) / (2.0 * PI);
        for j in 0..n {
            let v = disc.s.b[j];
            omega[it][j] += tail_integral(k, t, v, wlo, whi, omega0[j], first.0[j], last.0[j]);
            psi[it][j] += tail_integral(k, t, v, wlo, whi, psi0[j], first.1[j], last.1[j]);
            omega[it][j] *= scale;
            psi[it][j] *= scale;
        }
    }
    Ok(EvolutionSeries { times: times.to_vec(), grid: disc.grid.clone(), omega_t: omega, psi_t: psi, profiles: None, mode: *mode })
}

/// The discrete generator pieces for (I - s A) with A = nu(D2 - k^2) - ikb + ikb'' G.
fn shifted_generator(disc: &Discretization, mode: &ModeParams, s: f64) -> CoupledOperator {
    let k = mode.kf();
    let nu = mode.nu;
    let d = disc.s.b.iter().map(|b| C64::new(1.0 + s * nu * k * k, s * k * b)).collect();
    let c = disc.s.bpp.iter().map(|bpp| C64::new(0.0, -s * k * bpp)).collect();
    CoupledOperator::new(disc.grid.h, k.abs(), C64::new(-s * nu, 0.0), d, c)
}

/// Crank-Nicolson for d_t omega = -nu(k^2 - D2) omega - ikb omega + ikb'' G omega; every
/// sample time must be a multiple of dt.
pub fn evolve_direct(
    mode: &ModeParams,
    init: &InitialData,
    disc: &Discretization,
    times: &[f64],
    dt: f64,
) -> Result<EvolutionSeries> {
    check_times(times)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let number = dt * mode.kf().abs() * disc.max_abs_b();
    if number > STEP_LIMIT {
        return Err(Error::StepTooLarge(number));
    }
    check_grid(disc, mode)?;
    init.check_inside(&disc.grid)?;
    let steps: Vec<usize> = times
        .iter()
        .map(|&t| {
            let s = (t / dt).round();
            if (s * dt - t).abs() > 1e-9 * t.max(1.0) {
                Err(Error::InvalidArgument(format!("time {t} is not a multiple of dt = {dt}")))
            } else {
                Ok(s as usize)
            }
        })
        .collect::<Result<_>>()?;
    let implicit = shifted_generator(disc, mode, 0.5 * dt);
    let explicit = shifted_generator(disc, mode, -0.5 * dt);
    let lu = implicit.factor().map_err(|e| Error::CouplingSingular { w: f64::NAN, detail: e.to_string() })?;
    let mut omega = init.omega0(&disc.grid);
    let mut psi = implicit.poisson().solve(&omega);
    let mut out_w = Vec::with_capacity(times.len());
    let mut out_p = Vec::with_capacity(times.len());
    let mut done = 0usize;
    for &target in &steps {
        while done < target {
            let rhs = explicit.apply(&omega);
            let (w, g) = lu.solve(&rhs);
            omega = w;
            psi = g;
            done += 1;
        }
        out_w.push(omega.clone());
        out_p.push(psi.clone());
    }
    Ok(EvolutionSeries { times: times.to_vec(), grid: disc.grid.clone(), omega_t: out_w, psi_t: out_p, profiles: None, mode: *mode })
}

/// Couette (b(y) = y): omega~(t, xi) = omega^_0(xi + kt) exp(-nu[k^2 t + ((xi + kt)^3 - xi^3)/(3k)]),
/// psi~ = -omega~ / (k^2 + xi^2), on the whole line, sampled on `grid`.
/// e^{-nu k^2 t}.
pub fn dissipation_factor(mode: &ModeParams, t: f64) -> f64 {
    (-mode.nu * mode.kf() * mode.kf() * t).exp()
}

/// Decay of the Couette Fourier coefficient started at frequency eta, observed at
/// xi = eta - kt: exp(-nu int_0^t (k^2 + (eta - ks)^2) ds).
pub fn couette_multiplier(nu: f64, k: f64, t: f64, eta: f64) -> f64 {
    let xi = eta - k * t;
    (-nu * (k * k * t + (eta.powi(3) - xi.powi(3)) / (3.0 * k))).exp()
}

pub fn couette_closed_form(mode: &ModeParams, init: &InitialData, grid: &Grid, times: &[f64]) -> Result<EvolutionSeries> {
    check_times(times)?;
    init.check_inside(grid)?;
    let k = mode.kf();
    let nu = mode.nu;
    let half = grid.lo.abs().max(grid.hi().abs());
    let deta = PI / (2.0 * half);
    let eta_max = PI / grid.h;
    let mmax = (eta_max / deta).floor() as i64;
    let omega0 = init.omega0(grid);
    let norm = 1.0 / (2.0 * PI).sqrt();
    let hat = |eta: f64| -> C64 {
        let step = C64::from_polar(1.0, -eta * grid.h);
        let mut ph = C64::from_polar(1.0, -eta * grid.lo);
        let mut s = ZERO;
        for (j, z) in omega0.iter().enumerate() {
            let wgt = if j == 0 || j == grid.n - 1 { 0.5 } else { 1.0 };
            s += z * ph * wgt;
            ph *= step;
        }
        s * grid.h * norm
    };
    let spectrum: Vec<(f64, C64)> = (-mmax..=mmax).into_par_iter().map(|m| (m as f64 * deta, hat(m as f64 * deta))).collect();
    let peak = spectrum.iter().map(|x| x.1.norm()).fold(0.0, f64::max);
    let spectrum: Vec<(f64, C64)> = spectrum.into_iter().filter(|x| x.1.norm() > 1e-17 * peak).collect();
    let mut omega_t = Vec::with_capacity(times.len());
    let mut psi_t = Vec::with_capacity(times.len());
    for &t in times {
        let terms: Vec<(f64, C64, C64)> = spectrum
            .iter()
            .map(|&(eta, c)| {
                let xi = eta - k * t;
                let w = c * couette_multiplier(nu, k, t, eta) * deta * norm;
                (xi, w, -w / (k * k + xi * xi))
            })
            .collect();
        let cols: Vec<(C64, C64)> = (0..grid.n)
            .into_par_iter()
            .map(|j| {
                let y = grid.x(j);
                let mut a = ZERO;
                let mut b = ZERO;
                for &(xi, w, ps) in &terms {
                    let e = C64::from_polar(1.0, xi * y);
                    a += w * e;
                    b += ps * e;
                }
                (a, b)
            })
            .collect();
        omega_t.push(cols.iter().map(|c| c.0).collect());
        psi_t.push(cols.iter().map(|c| c.1).collect());
    }
    Ok(EvolutionSeries { times: times.to_vec(), grid: grid.clone(), omega_t, psi_t, profiles: None, mode: *mode })
}

/// Fills F_k(t, v) = omega_k(t, b^{-1}(v)) e^{ikvt} and Phi_k on `vgrid`. The transport
/// phase is removed on the y-grid before interpolating.
pub fn extract_profiles(series: &mut EvolutionSeries, p: &ShearProfile, vgrid: &Grid) -> Result<()> {
    let k = series.mode.kf();
    let g = &series.grid;
    let b = p.sample(g).b;
    let ys: Vec<f64> = vgrid.nodes().into_iter().map(|v| invert_profile(p, v)).collect::<Result<_>>()?;
    if ys.iter().any(|y| !g.contains(*y)) {
        return Err(Error::InvalidArgument("v-grid maps outside the y-grid".into()));
    }
    let mut f_t = Vec::with_capacity(series.times.len());
    let mut phi_t = Vec::with_capacity(series.times.len());
    for (it, &t) in series.times.iter().enumerate() {
        let unwind = |f: &[C64]| -> Vec<C64> {
            let prof: Vec<C64> = f.iter().zip(&b).map(|(z, bj)| z * C64::from_polar(1.0, k * bj * t)).collect();
            ys.iter().map(|&y| lagrange4(&prof, g.lo, g.h, y)).collect()
        };
        f_t.push(unwind(&series.omega_t[it]));
        phi_t.push(unwind(&series.psi_t[it]));
    }
    series.profiles = Some(Profiles { vgrid: vgrid.clone(), f_t, phi_t });
    Ok(())
}

/// Row of the norms-versus-time table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    /// ||F_k(t)||_{L^2(dv)} = (int |omega|^2 b' dy)^{1/2}.
    pub l2_f: f64,
    pub l2_phi: f64,
}

/// L^2(dv) norms of the profiles computed on the y-grid by change of variables.
pub fn profile_norms(series: &EvolutionSeries, p: &ShearProfile) -> Vec<NormRow> {
    let bp = p.sample(&series.grid).bp;
    let h = series.grid.h;
    let l2 = |f: &[C64]| (f.iter().zip(&bp).map(|(z, d)| z.norm_sqr() * d).sum::<f64>() * h).sqrt();
    series
        .times
        .iter()
        .enumerate()
        .map(|(it, &t)| NormRow { t, l2_f: l2(&series.omega_t[it]), l2_phi: l2(&series.psi_t[it]) })
        .collect()
}

/// Relative L^2 difference of omega at every shared time (same grid required).
pub fn compare_series(a: &EvolutionSeries, b: &EvolutionSeries) -> Result<Vec<f64>> {
    if a.grid != b.grid || a.times != b.times {
        return Err(Error::InvalidArgument("series differ in grid or times".into()));
    }
    Ok(a.omega_t.iter().zip(&b.omega_t).map(|(x, y)| rel_l2_diff(x, y)).collect())
}

/// Uniform w-grid covering the v-range of `disc` with `margin` on both sides and spacing
/// at most dw.
pub fn default_wgrid(disc: &Discretization, margin: f64, dw: f64) -> Grid {
    let lo = disc.s.b[0] - margin;
    let hi = disc.s.b[disc.n() - 1] + margin;
    let cells = ((hi - lo) / dw).ceil() as usize;
    Grid::new(lo, hi, cells + 1)
}

/// Grid check shared by the evolution drivers.
pub fn check_grid(disc: &Discretization, mode: &ModeParams) -> Result<()> {
    check_resolution(&disc.grid, mode.eps)
}

/// Long-time decay measurements over a viscosity sweep, computed with the time stepper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySweepSpec {
    pub k: i32,
    pub nus: Vec<f64>,
    pub half_width: f64,
    /// Upper bound on the y spacing; the critical-layer limit is applied on top.
    pub spacing: f64,
    pub dt: f64,
    /// Samples are taken every `sample_every` time units.
    pub sample_every: f64,
    /// Exponential-fit window in units of nu^{-1/3}.
    pub rate_window: [f64; 2],
    /// Power-law fit window for the stream profile.
    pub power_window: [f64; 2],
    pub delta: f64,
    /// Gevrey sup is taken over sampled t <= this.
    pub gevrey_t_max: f64,
}

impl Default for DecaySweepSpec {
    fn default() -> Self {
        DecaySweepSpec {
            k: 1,
            nus: vec![1e-3, 3e-4, 1e-4, 3e-5],
            half_width: 6.0,
            spacing: 0.0025,
            dt: 0.005,
            sample_every: 1.0,
            rate_window: [1.0, 3.0],
            power_window: [5.0, 50.0],
            delta: 0.05,
            gevrey_t_max: 50.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    pub nu: f64,
    /// Exponential rate of ||F_k(t)|| e^{nu k^2 t} on the scaled window.
    pub rate: f64,
    pub rate_residual: f64,
    /// sup_t ||F_k(t)||_G / ||F_0k||_G.
    pub gevrey_ratio: f64,
    /// Power-law exponent of ||Phi_k(t)|| on the power window.
    pub phi_power: f64,
    pub phi_residual: f64,
    pub norms: Vec<NormRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecaySweep {
    pub rows: Vec<DecayRow>,
    /// Slope of log(rate) against log(nu); None for a single viscosity.
    pub rate_slope: Option<f64>,
    /// max / min of the Gevrey ratios across the sweep.
    pub gevrey_variation: f64,
}

pub fn decay_sweep(p: &ShearProfile, init: &InitialData, spec: &DecaySweepSpec) -> Result<DecaySweep> {
    use crate::diagnostics::{fit_rate, gevrey_norm_1d, linear_fit, DecayModel, GevreyWeight};
    if spec.nus.is_empty() || !(spec.sample_every > 0.0) || !(spec.spacing > 0.0) {
        return Err(Error::InvalidArgument("decay sweep needs viscosities and positive spacings".into()));
    }
    let wgt = GevreyWeight::new(spec.delta, spec.k as f64);
    let rows: Vec<DecayRow> = spec
        .nus
        .par_iter()
        .map(|&nu| {
            let mode = ModeParams::new(spec.k, nu)?;
            let h = spec.spacing.min(crate::airy::critical_spacing(mode.eps));
            let disc = Discretization::new(p, Grid::symmetric(spec.half_width, h));
            let scale = nu.powf(-1.0 / 3.0) * (spec.k as f64).abs().powf(-2.0 / 3.0);
            let t_end = (spec.rate_window[1] * scale).max(spec.power_window[1]).max(spec.gevrey_t_max);
            let count = (t_end / spec.sample_every).ceil() as usize;
            let times: Vec<f64> = (0..=count).map(|i| i as f64 * spec.sample_every).collect();
            let mut series = evolve_direct(&mode, init, &disc, &times, spec.dt)?;
            let norms = profile_norms(&series, p);
            let lo = disc.s.b[0] + 0.5;
            let hi = disc.s.b[disc.n() - 1] - 0.5;
            extract_profiles(&mut series, p, &Grid::with_spacing(lo, hi, h))?;
            let prof = series.profiles.as_ref().expect("profiles");
            let mut gsup: f64 = 0.0;
            let mut g0 = 0.0;
            for (it, &t) in series.times.iter().enumerate() {
                if t > spec.gevrey_t_max {
                    break;
                }
                let g = gevrey_norm_1d(&prof.f_t[it], prof.vgrid.h, &wgt)?;
                if it == 0 {
                    g0 = g;
                }
                gsup = gsup.max(g);
            }
            let undamped: Vec<(f64, f64)> = norms.iter().map(|r| (r.t, r.l2_f / dissipation_factor(&mode, r.t))).collect();
            let rate = fit_rate(&undamped, DecayModel::Exponential, Some([spec.rate_window[0] * scale, spec.rate_window[1] * scale]))?;
            let phi: Vec<(f64, f64)> = norms.iter().map(|r| (r.t, r.l2_phi)).collect();
            let power = fit_rate(&phi, DecayModel::Power, Some(spec.power_window))?;
            Ok(DecayRow {
                nu,
                rate: rate.rate,
                rate_residual: rate.residual,
                gevrey_ratio: gsup / g0,
                phi_power: power.rate,
                phi_residual: power.residual,
                norms,
            })
        })
        .collect::<Result<_>>()?;
    let rate_slope = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.nu.ln(), r.rate.ln())).collect();
        linear_fit(&pts).map(|f| f.1)
    } else {
        None
    };
    let gmax = rows.iter().map(|r| r.gevrey_ratio).fold(0.0, f64::max);
    let gmin = rows.iter().map(|r| r.gevrey_ratio).fold(f64::INFINITY, f64::min);
    Ok(DecaySweep { rows, rate_slope, gevrey_variation: gmax / gmin })
}
