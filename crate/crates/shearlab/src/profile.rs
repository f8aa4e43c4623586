//! Monotone shear profiles b(y): Couette and a compactly supported bump deformation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Couette,
    Bump,
}

/// Serializable description of a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_radius")]
    pub support_radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn couette() -> Self {
        ProfileSpec { kind: ProfileKind::Couette, amplitude: 0.0, support_radius: 1.0 }
    }

    pub fn bump(amplitude: f64, support_radius: f64) -> Self {
        ProfileSpec { kind: ProfileKind::Bump, amplitude, support_radius }
    }

    pub fn build(&self) -> Result<ShearProfile> {
        build_profile(self.kind, self.amplitude, self.support_radius)
    }
}

/// The unit bump exp(-1/(1-s^2)) on (-1, 1).
#[inline]
pub fn unit_bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

const TABLE_CELLS: usize = 2048;

/// Cumulative integrals of the unit bump on a uniform table over [-1, 1]:
/// p1(s) = int_0^s bump, p2(s) = int_0^s p1.
#[derive(Clone, Debug)]
struct BumpTable {
    ds: f64,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

fn gauss15<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    quad::gk15(&|x| C64::new(f(x), 0.0), a, b).0.re
}

impl BumpTable {
    fn new() -> Self {
        let m = TABLE_CELLS;
        let ds = 2.0 / m as f64;
        let s = |i: usize| -1.0 + i as f64 * ds;
        let mid = m / 2;
        let mut p1 = vec![0.0; m + 1];
        let mut p2 = vec![0.0; m + 1];
        for i in mid..m {
            let (a, b) = (s(i), s(i + 1));
            p1[i + 1] = p1[i] + gauss15(unit_bump, a, b);
            p2[i + 1] = p2[i] + p1[i] * ds + gauss15(|u| (b - u) * unit_bump(u), a, b);
        }
        for i in (1..=mid).rev() {
            let (a, b) = (s(i - 1), s(i));
            p1[i - 1] = p1[i] - gauss15(unit_bump, a, b);
            // p2(a) = p2(b) - int_a^b p1, with p1(u) = p1(b) - int_u^b bump
            p2[i - 1] = p2[i] - (p1[i] * ds - gauss15(|u| (u - a) * unit_bump(u), a, b));
        }
        BumpTable { ds, p1, p2 }
    }

    fn half_mass(&self) -> f64 {
        self.p1[TABLE_CELLS]
    }

    /// (p1(s), p2(s)) for any real s.
    fn eval(&self, s: f64) -> (f64, f64) {
        let m = TABLE_CELLS;
        if s >= 1.0 {
            let (a, b) = (self.p1[m], self.p2[m]);
            return (a, b + a * (s - 1.0));
        }
        if s <= -1.0 {
            let (a, b) = (self.p1[0], self.p2[0]);
            return (a, b + a * (s + 1.0));
        }
        let i = (((s + 1.0) / self.ds).floor() as usize).min(m - 1);
        let a = -1.0 + i as f64 * self.ds;
        if s == a {
            return (self.p1[i], self.p2[i]);
        }
        let p1 = self.p1[i] + gauss15(unit_bump, a, s);
        let p2 = self.p2[i] + self.p1[i] * (s - a) + gauss15(|u| (s - u) * unit_bump(u), a, s);
        (p1, p2)
    }
}

/// Immutable shear profile with measured assumption constants.
#[derive(Clone, Debug)]
pub struct ShearProfile {
    pub spec: ProfileSpec,
    /// min(min b', 1/max b').
    pub sigma0: f64,
    /// Radius declared to contain supp b''.
    pub support_radius: f64,
    /// Nominal Gevrey exponent of b''.
    pub delta0: f64,
    pub amplitude: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    table: Option<BumpTable>,
}

/// b, b', b'' sampled on a grid.
#[derive(Clone, Debug)]
pub struct ProfileSamples {
    pub b: Vec<f64>,
    pub bp: Vec<f64>,
    pub bpp: Vec<f64>,
}

pub fn build_profile(kind: ProfileKind, amplitude: f64, support_radius: f64) -> Result<ShearProfile> {
    if !(support_radius > 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "support_radius must be positive and amplitude finite (got {support_radius}, {amplitude})"
        )));
    }
    let spec = ProfileSpec { kind, amplitude, support_radius };
    match kind {
        ProfileKind::Couette => Ok(ShearProfile {
            spec,
            sigma0: 1.0,
            support_radius,
            delta0: 0.99,
            amplitude: 0.0,
            slope_min: 1.0,
            slope_max: 1.0,
            table: None,
        }),
        ProfileKind::Bump => {
            let table = BumpTable::new();
            let spread = amplitude.abs() * support_radius * table.half_mass();
            let slope_min = 1.0 - spread;
            let slope_max = 1.0 + spread;
            if slope_min <= 0.0 {
                return Err(Error::MonotonicityViolation { min_slope: slope_min });
            }
            let sigma0 = slope_min.min(1.0 / slope_max);
            let p = ShearProfile {
                spec,
                sigma0,
                support_radius,
                delta0: (2.0 * support_radius).sqrt().min(0.99),
                amplitude,
                slope_min,
                slope_max,
                table: Some(table),
            };
            if support_radius > 1.0 / sigma0 {
                return Err(Error::AssumptionViolation(format!(
                    "supp b'' radius {support_radius} exceeds 1/sigma0 = {:.4}",
                    1.0 / sigma0
                )));
            }
            let sup = p.gevrey_sup(sigma0, 400.0, 801);
            if sup > 1.0 / sigma0 {
                return Err(Error::AssumptionViolation(format!(
                    "sup exp(sigma0 <xi>^1/2)|b''^| = {sup:.4} exceeds 1/sigma0 = {:.4}",
                    1.0 / sigma0
                )));
            }
            Ok(p)
        }
    }
}

impl ShearProfile {
    pub fn couette() -> Self {
        build_profile(ProfileKind::Couette, 0.0, 1.0).expect("couette is always valid")
    }

    pub fn is_couette(&self) -> bool {
        self.table.is_none()
    }

    /// Same profile with a different declared support radius (no validation).
    pub fn with_declared_support(mut self, radius: f64) -> Self {
        self.support_radius = radius;
        self
    }

    pub fn b(&self, y: f64) -> f64 {
        match &self.table {
            None => y,
            Some(t) => {
                let r = self.spec.support_radius;
                y + self.amplitude * r * r * t.eval(y / r).1
            }
        }
    }

    pub fn bp(&self, y: f64) -> f64 {
        match &self.table {
            None => 1.0,
            Some(t) => {
                let r = self.spec.support_radius;
                1.0 + self.amplitude * r * t.eval(y / r).0
            }
        }
    }

    pub fn bpp(&self, y: f64) -> f64 {
        match &self.table {
            None => 0.0,
            Some(_) => self.amplitude * unit_bump(y / self.spec.support_radius),
        }
    }

    pub fn sample(&self, grid: &Grid) -> ProfileSamples {
        let ys = grid.nodes();
        match &self.table {
            None => ProfileSamples { b: ys.clone(), bp: vec![1.0; grid.n], bpp: vec![0.0; grid.n] },
            Some(t) => {
                let r = self.spec.support_radius;
                let a = self.amplitude;
                let mut out = ProfileSamples { b: Vec::with_capacity(grid.n), bp: Vec::with_capacity(grid.n), bpp: Vec::with_capacity(grid.n) };
                for &y in &ys {
                    let (p1, p2) = t.eval(y / r);
                    out.b.push(y + a * r * r * p2);
                    out.bp.push(1.0 + a * r * p1);
                    out.bpp.push(a * unit_bump(y / r));
                }
                out
            }
        }
    }

    /// Fourier transform of b'' with the unitary convention (1/sqrt(2 pi)) int e^{-i y xi}.
    pub fn bpp_hat(&self, xi: f64) -> f64 {
        if self.is_couette() {
            return 0.0;
        }
        let r = self.spec.support_radius;
        let eta = r * xi;
        let panels = ((eta.abs() / 2.0).ceil() as usize).clamp(4, 4000);
        let breaks: Vec<f64> = (0..=panels).map(|i| -1.0 + 2.0 * i as f64 / panels as f64).collect();
        let v: f64 = breaks.windows(2).map(|w| gauss15(|s| unit_bump(s) * (eta * s).cos(), w[0], w[1])).sum();
        self.amplitude * r * v / (2.0 * PI).sqrt()
    }

    /// max over xi in [0, xi_max] of exp(sigma <xi>^{1/2}) |b''^(xi)|.
    pub fn gevrey_sup(&self, sigma: f64, xi_max: f64, samples: usize) -> f64 {
        (0..samples)
            .map(|i| {
                let xi = xi_max * i as f64 / (samples - 1) as f64;
                (sigma * (1.0 + xi * xi).powf(0.25)).exp() * self.bpp_hat(xi).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// y = b^{-1}(v) by Newton's method safeguarded with bisection.
pub fn invert_profile(p: &ShearProfile, v: f64) -> Result<f64> {
    if p.is_couette() {
        return Ok(v);
    }
    let (m, big) = (p.slope_min, p.slope_max);
    // b(0) = 0 and m <= b' <= big bracket the root
    let (mut lo, mut hi) = if v >= 0.0 { (v / big, v / m) } else { (v / m, v / big) };
    lo -= 1e-12;
    hi += 1e-12;
    let tol = 1e-13 * (1.0 + v.abs());
    let mut y = v / p.bp(0.0);
    if !(y > lo && y < hi) {
        y = 0.5 * (lo + hi);
    }
    for _ in 0..200 {
        let r = p.b(y) - v;
        if r.abs() <= tol {
            return Ok(y);
        }
        if r > 0.0 {
            hi = y;
        } else {
            lo = y;
        }
        let step = y - r / p.bp(y);
        y = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if hi - lo < 1e-15 * (1.0 + y.abs()) {
            return Ok(y);
        }
    }
    Err(Error::NonConvergence(format!("invert_profile at v = {v}")))
}

/// Result of [`check_assumptions`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub sigma0_hat: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub support_ok: bool,
    /// Fitted c in |b''^(xi)| ~ exp(-c <xi>^{1/2}); None when b'' vanishes.
    pub gevrey_decay_fit: Option<f64>,
    /// max over sampled xi of exp(sigma0_hat <xi>^{1/2}) |b''^(xi)|.
    pub gevrey_sup: f64,
    pub gevrey_ok: bool,
}

pub fn check_assumptions(p: &ShearProfile, grid: &Grid) -> AssumptionReport {
    let s = p.sample(grid);
    let slope_min = s.bp.iter().cloned().fold(f64::INFINITY, f64::min);
    let slope_max = s.bp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sigma0_hat = slope_min.min(1.0 / slope_max);
    let r = p.support_radius;
    let support_ok = grid
        .nodes()
        .iter()
        .zip(&s.bpp)
        .all(|(&y, &v)| y.abs() <= r * (1.0 + 1e-12) || v == 0.0);

    // direct transform of the sampled b'' on a frequency ladder
    let bmax = s.bpp.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let (fit, sup) = if bmax == 0.0 {
        (None, 0.0)
    } else {
        let xi_max = 0.5 * PI / grid.h;
        let nxi = 2000;
        let ys = grid.nodes();
        let hat: Vec<(f64, f64)> = (0..nxi)
            .map(|i| {
                let xi = xi_max * i as f64 / (nxi - 1) as f64;
                let z: C64 = ys.iter().zip(&s.bpp).map(|(&y, &b)| C64::from_polar(b, -xi * y)).sum();
                (xi, (z * grid.h / (2.0 * PI).sqrt()).norm())
            })
            .collect();
        let sup = hat
            .iter()
            .map(|&(xi, a)| (sigma0_hat * (1.0 + xi * xi).powf(0.25)).exp() * a)
            .fold(0.0, f64::max);
        // envelope: block maxima above the round-off floor
        let peak = hat.iter().map(|x| x.1).fold(0.0, f64::max);
        let mut pts = Vec::new();
        for blk in hat.chunks(40).skip(1) {
            let (xi, a) = blk.iter().cloned().fold((0.0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if a > 1e-11 * peak {
                pts.push(((1.0 + xi * xi).powf(0.25), a.ln()));
            }
        }
        (crate::diagnostics::linear_fit(&pts).map(|(_, slope, _)| -slope), sup)
    };
    AssumptionReport {
        sigma0_hat,
        slope_min,
        slope_max,
        support_ok,
        gevrey_decay_fit: fit,
        gevrey_sup: sup,
        gevrey_ok: sup <= 1.0 / sigma0_hat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_quadrature() {
        let p = build_profile(ProfileKind::Bump, 0.3, 1.0).unwrap();
        for &y in &[-0.93, -0.2, 0.0, 0.41, 0.999] {
            let direct = quad::integrate(|u| C64::new(unit_bump(u), 0.0), 0.0, y, 1e-16, 1e-14).value.re;
            assert!((p.bp(y) - (1.0 + 0.3 * direct)).abs() < 1e-14, "y={y} {} {}", p.bp(y), 1.0 + 0.3 * direct);
            let b = quad::integrate(|u| C64::new(p.bp(u), 0.0), 0.0, y, 1e-16, 1e-14).value.re;
            assert!((p.b(y) - b).abs() < 1e-13, "y={y} {} {b}", p.b(y));
        }
    }
}

/// Fourier mode and viscosity; eps = nu / k carries the sign of k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub k: i32,
    pub nu: f64,
    pub eps: f64,
}

impl ModeParams {
    pub fn new(k: i32, nu: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be nonzero".into()));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidArgument(format!("nu must lie in (0,1), got {nu}")));
        }
        Ok(ModeParams { k, nu, eps: nu / k as f64 })
    }

    #[inline]
    pub fn kf(&self) -> f64 {
        self.k as f64
    }
}

/// A grid together with the profile sampled on it.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: Grid,
    pub s: ProfileSamples,
    /// Indices of nodes where b'' is nonzero.
    pub support: Vec<usize>,
}

impl Discretization {
    pub fn new(p: &ShearProfile, grid: Grid) -> Self {
        let s = p.sample(&grid);
        let support = s.bpp.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
        Discretization { grid, s, support }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn max_abs_b(&self) -> f64 {
        self.s.b.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}
