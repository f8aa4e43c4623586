//! Fourier-side Gevrey norms, decay-rate fits and the Gevrey multiplier kernel probe.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad;

/// Weight exp(delta <k, xi>^{1/2}) with <k, xi> = (1 + k^2 + xi^2)^{1/2}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyWeight {
    pub delta: f64,
    pub k: f64,
}

impl GevreyWeight {
    pub fn new(delta: f64, k: f64) -> Self {
        assert!(delta >= 0.0, "delta must be non-negative");
        GevreyWeight { delta, k }
    }

    #[inline]
    pub fn bracket(&self, xi: f64) -> f64 {
        (1.0 + self.k * self.k + xi * xi).sqrt()
    }

    #[inline]
    pub fn eval(&self, xi: f64) -> f64 {
        (self.delta * self.bracket(xi).sqrt()).exp()
    }
}

/// Least squares line through (x, y): (intercept, slope, rms residual).
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / nf).sqrt();
    Some((icpt, slope, rms))
}

/// Smooth taper: 1 on the inner part, falling to 0 over `frac` of each side.
pub fn taper(n: usize, frac: f64) -> Vec<f64> {
    let edge = ((n as f64) * frac).ceil().max(1.0);
    let step = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    (0..n)
        .map(|j| {
            let d = (j.min(n - 1 - j) as f64) / edge;
            if d >= 1.0 {
                1.0
            } else {
                step(d) / (step(d) + step(1.0 - d))
            }
        })
        .collect()
}

fn needs_window(g: &[C64]) -> bool {
    let peak = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = g.len();
    peak > 0.0 && (g[0].norm() > 1e-10 * peak || g[n - 1].norm() > 1e-10 * peak)
}

/// Detailed output of the 1D Gevrey norm.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GevreyNorm {
    pub value: f64,
    pub windowed: bool,
    pub nyquist_ratio: f64,
}

fn freq(m: usize, nfft: usize, h: f64) -> f64 {
    let mm = if m < nfft / 2 { m as f64 } else { m as f64 - nfft as f64 };
    2.0 * PI * mm / (nfft as f64 * h)
}

/// |e^{delta <k,xi>^{1/2}} g^(xi)|_{L^2} for samples g on a uniform grid of spacing h.
pub fn gevrey_norm_1d(g: &[C64], h: f64, wgt: &GevreyWeight) -> Result<f64> {
    gevrey_norm_1d_detailed(g, h, wgt).map(|r| r.value)
}

pub fn gevrey_norm_1d_detailed(g: &[C64], h: f64, wgt: &GevreyWeight) -> Result<GevreyNorm> {
    let n = g.len();
    if n == 0 {
        return Ok(GevreyNorm { value: 0.0, windowed: false, nyquist_ratio: 0.0 });
    }
    let windowed = needs_window(g);
    let mut buf: Vec<C64> = if windowed {
        let t = taper(n, 0.1);
        g.iter().zip(&t).map(|(z, w)| z * w).collect()
    } else {
        g.to_vec()
    };
    let nfft = (4 * n).next_power_of_two();
    buf.resize(nfft, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(nfft).process(&mut buf);
    let scale = h / (2.0 * PI).sqrt();
    let amp: Vec<f64> = buf.iter().map(|z| z.norm() * scale).collect();
    let peak = amp.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(GevreyNorm { value: 0.0, windowed, nyquist_ratio: 0.0 });
    }
    let band = (nfft / 40).max(1);
    let nyq = amp[nfft / 2 - band..nfft / 2 + band].iter().cloned().fold(0.0, f64::max) / peak;
    if nyq > 1e-8 {
        return Err(Error::AliasingRisk(nyq));
    }
    let dxi = 2.0 * PI / (nfft as f64 * h);
    let s: f64 = amp
        .iter()
        .enumerate()
        .map(|(m, a)| {
            let w = wgt.eval(freq(m, nfft, h));
            (w * a).powi(2)
        })
        .sum();
    Ok(GevreyNorm { value: (s * dxi).sqrt(), windowed, nyquist_ratio: nyq })
}

/// |(|k| + |xi|)^{xi_weight} e^{delta <k,eta>^{1/2}} G~(xi, eta)|_{L^2} for a field
/// `cols[iw][iv]` on uniform (v, w) grids; xi is dual to v, eta dual to w.
pub fn gevrey_norm_2d(cols: &[Vec<C64>], hv: f64, hw: f64, wgt: &GevreyWeight, xi_weight: bool) -> Result<f64> {
    let nw = cols.len();
    if nw == 0 {
        return Ok(0.0);
    }
    let nv = cols[0].len();
    let peak = cols.iter().flat_map(|c| c.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(0.0);
    }
    let edge = |z: &C64| z.norm() > 1e-10 * peak;
    let win_v = cols.iter().any(|c| edge(&c[0]) || edge(&c[nv - 1]));
    let win_w = cols[0].iter().chain(cols[nw - 1].iter()).any(edge);
    let tv = if win_v { taper(nv, 0.1) } else { vec![1.0; nv] };
    let tw = if win_w { taper(nw, 0.1) } else { vec![1.0; nw] };
    let fv = (4 * nv).next_power_of_two();
    let fw = (4 * nw).next_power_of_two();
    let mut planner = FftPlanner::new();
    let pv = planner.plan_fft_forward(fv);
    let pw = planner.plan_fft_forward(fw);
    // transform in v for every w, then in w for every xi
    let mut grid = vec![C64::new(0.0, 0.0); fv * fw];
    for (iw, col) in cols.iter().enumerate() {
        assert_eq!(col.len(), nv);
        let mut buf: Vec<C64> = col.iter().zip(&tv).map(|(z, t)| z * (t * tw[iw])).collect();
        buf.resize(fv, C64::new(0.0, 0.0));
        pv.process(&mut buf);
        for (m, z) in buf.into_iter().enumerate() {
            grid[m * fw + iw] = z;
        }
    }
    for m in 0..fv {
        pw.process(&mut grid[m * fw..(m + 1) * fw]);
    }
    let scale = hv * hw / (2.0 * PI);
    let amax = grid.iter().map(|z| z.norm()).fold(0.0, f64::max) * scale;
    let bv = (fv / 40).max(1);
    let bw = (fw / 40).max(1);
    let mut nyq: f64 = 0.0;
    for m in 0..fv {
        for j in 0..fw {
            let near_v = m + bv > fv / 2 && m < fv / 2 + bv;
            let near_w = j + bw > fw / 2 && j < fw / 2 + bw;
            if near_v || near_w {
                nyq = nyq.max(grid[m * fw + j].norm() * scale);
            }
        }
    }
    if nyq > 1e-8 * amax {
        return Err(Error::AliasingRisk(nyq / amax));
    }
    let dxi = 2.0 * PI / (fv as f64 * hv);
    let deta = 2.0 * PI / (fw as f64 * hw);
    let mut s = 0.0;
    for m in 0..fv {
        let xi = freq(m, fv, hv);
        let xw = if xi_weight { wgt.k.abs() + xi.abs() } else { 1.0 };
        for j in 0..fw {
            let w = xw * wgt.eval(freq(j, fw, hw));
            s += (w * grid[m * fw + j].norm() * scale).powi(2);
        }
    }
    Ok((s * dxi * deta).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Exponential,
    Power,
}

/// Least-squares decay fit on a window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// Exponential: value ~ A e^{-rate t}. Power: value ~ A t^{rate}.
    pub rate: f64,
    pub prefactor: f64,
    pub window: [f64; 2],
    /// RMS of the log residuals over the window.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_rate(series: &[(f64, f64)], model: DecayModel, window: Option<[f64; 2]>) -> Result<DecayFit> {
    let win = window.unwrap_or_else(|| {
        let lo = series.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = series.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        [lo, hi]
    });
    let sel: Vec<(f64, f64)> = series.iter().cloned().filter(|p| p.0 >= win[0] && p.0 <= win[1]).collect();
    if sel.len() < 5 {
        return Err(Error::DegenerateFit(format!("{} points in window, need 5", sel.len())));
    }
    if sel.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::DegenerateFit("non-positive value in window".into()));
    }
    if model == DecayModel::Power && sel.iter().any(|p| !(p.0 > 0.0)) {
        return Err(Error::DegenerateFit("power fit needs t > 0".into()));
    }
    let vmax = sel.iter().map(|p| p.1).fold(0.0, f64::max);
    let vmin = sel.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if (vmax - vmin) <= 1e-12 * vmax {
        return Err(Error::DegenerateFit("values span below 1e-12 dynamic range".into()));
    }
    let pts: Vec<(f64, f64)> = sel
        .iter()
        .map(|&(t, v)| match model {
            DecayModel::Exponential => (t, v.ln()),
            DecayModel::Power => (t.ln(), v.ln()),
        })
        .collect();
    let (icpt, slope, rms) = linear_fit(&pts).ok_or_else(|| Error::DegenerateFit("collinear abscissae".into()))?;
    let rate = match model {
        DecayModel::Exponential => -slope,
        DecayModel::Power => slope,
    };
    Ok(DecayFit { model, rate, prefactor: icpt.exp(), window: win, residual: rms, points: sel.len() })
}

/// Gevrey-class cutoff: 1 on [0,1], 0 beyond 2, transition built from exp(-x^{-3}).
pub fn gevrey_cutoff(s: f64) -> f64 {
    let s = s.abs();
    let tau = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / (x * x * x)).exp() };
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let a = tau(2.0 - s);
        a / (a + tau(s - 1.0))
    }
}

/// K_R(y) = (1/sqrt(2 pi)) int e^{mu <k,xi>^{1/2}} Psi(xi/R) e^{-i y xi} dxi.
pub fn multiplier_kernel_regularized(mu: f64, k: f64, r: f64, y: f64) -> f64 {
    let w = GevreyWeight::new(mu, k);
    let per = if y == 0.0 { 1.0 } else { (PI / y.abs()).min(1.0) };
    let panels = ((2.0 * r / per).ceil() as usize).max(8);
    let breaks: Vec<f64> = (0..=panels).map(|i| 2.0 * r * i as f64 / panels as f64).collect();
    let f = |xi: f64| C64::new(w.eval(xi) * gevrey_cutoff(xi / r) * (y * xi).cos(), 0.0);
    let mut s = 0.0;
    for seg in breaks.windows(2) {
        s += quad::gk15(&f, seg[0], seg[1]).0.re;
    }
    2.0 * s / (2.0 * PI).sqrt()
}

/// Envelope report of the multiplier kernel probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiplierProbe {
    pub mu: f64,
    pub k: f64,
    pub r: f64,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
    /// Round-off floor below which samples are excluded from the fit.
    pub noise_floor: f64,
    /// Fitted c0 in |K(y)| ~ A e^{-c0 |y|^{1/2}}.
    pub c0: f64,
    pub prefactor: f64,
    /// RMS log residual divided by the spread of log|K| over the fitted points.
    pub relative_residual: f64,
    pub fitted_points: usize,
}

pub fn multiplier_kernel_probe(mu: f64, k: f64, ys: &[f64]) -> Result<MultiplierProbe> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!("mu must lie in (0,1), got {mu}")));
    }
    if ys.iter().any(|y| y.abs() <= 1.0) {
        return Err(Error::InvalidArgument("samples need |y| > 1".into()));
    }
    let mut r = 25.0;
    let mut prev: Vec<f64> = ys.iter().map(|&y| multiplier_kernel_regularized(mu, k, r, y)).collect();
    let values = loop {
        let r2 = 2.0 * r;
        let next: Vec<f64> = ys.iter().map(|&y| multiplier_kernel_regularized(mu, k, r2, y)).collect();
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r = r2;
        if change < 1e-6 {
            break next;
        }
        if r > 3200.0 {
            return Err(Error::RegularizationUnconverged(change));
        }
        prev = next;
    };
    // cancellation floor: the integrand reaches e^{mu (1+k^2+4R^2)^{1/4}}
    let amp = GevreyWeight::new(mu, k).eval(2.0 * r);
    let noise_floor = 1e3 * f64::EPSILON * amp * r;
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .zip(&values)
        .filter(|(_, v)| v.abs() > noise_floor)
        .map(|(y, v)| (y.abs().sqrt(), v.abs().ln()))
        .collect();
    let (icpt, slope, rms) = linear_fit(&pts).ok_or_else(|| Error::DegenerateFit("too few samples above floor".into()))?;
    let spread = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) - pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    Ok(MultiplierProbe {
        mu,
        k,
        r,
        ys: ys.to_vec(),
        values,
        noise_floor,
        c0: -slope,
        prefactor: icpt.exp(),
        relative_residual: if spread > 0.0 { rms / spread } else { f64::INFINITY },
        fitted_points: pts.len(),
    })
}
