//! Experiment configs, the pipelines behind each command-line subcommand, run manifests
//! and reports.
//!
//! A run validates the whole config first, then solves, writes CSV artifacts into the
//! output directory and finally `manifest.json` with a SHA-256 digest of every artifact.
//! Parallel maps are ordered, so artifacts do not depend on the thread count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::airy::{
    airy_kernel_column, bracket, couette_kernel_explicit, critical_spacing, model_airy_w_at, rescaled_kernel_scan,
    verify_airy_bounds, EnvelopeStyle, ResolventQuery,
};
use crate::diagnostics::{gevrey_norm_1d, gevrey_norm_2d, GevreyWeight};
use crate::elliptic::poisson_solve;
use crate::error::{Error, Result};
use crate::evolution::{
    compare_series, couette_closed_form, decay_sweep, default_wgrid, evolve_direct, evolve_representation,
    extract_profiles, phase_number, DecaySweepSpec, EvolutionSeries, PHASE_LIMIT, STEP_LIMIT,
};
use crate::grid::{rel_l2_diff, Grid};
use crate::orr_sommerfeld::{
    lap_kappa_scan, os_resolvent_solve_with, pv_delta_limit_check, spectral_density, theta_integral_solve,
    DensityColumns, InitialData, LapScanSpec, SolveStrategy, RESIDUAL_LIMIT,
};
use crate::profile::{check_assumptions, Discretization, ModeParams, ProfileKind, ProfileSpec, ShearProfile};
use crate::semigroup::{default_lambda_grid, discretize_generator, dsr_envelope_check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Resolvent,
    KernelVerify,
    LapScan,
    DsrCheck,
    FitDecay,
    ThetaBounds,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Simulate,
        ExperimentKind::Resolvent,
        ExperimentKind::KernelVerify,
        ExperimentKind::LapScan,
        ExperimentKind::DsrCheck,
        ExperimentKind::FitDecay,
        ExperimentKind::ThetaBounds,
    ];

    /// Subcommand spelling.
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Resolvent => "resolvent",
            ExperimentKind::KernelVerify => "kernel-verify",
            ExperimentKind::LapScan => "lap-scan",
            ExperimentKind::DsrCheck => "dsr-check",
            ExperimentKind::FitDecay => "fit-decay",
            ExperimentKind::ThetaBounds => "theta-bounds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModeSweep {
    pub k: Vec<i32>,
    pub nu: Vec<f64>,
}

impl Default for ModeSweep {
    fn default() -> Self {
        ModeSweep { k: vec![1], nu: vec![1e-3] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub half_width: f64,
    pub spacing: f64,
    /// Extra w-range beyond the v-range of the grid.
    pub w_margin: f64,
    pub w_spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_width: 6.0, spacing: 0.0025, w_margin: 2.0, w_spacing: 0.005 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_max: f64,
    /// Sample times are `samples` equally spaced points of [0, t_max].
    pub samples: usize,
    pub dt: f64,
    /// Sampling interval of the long runs in fit-decay.
    pub sample_every: f64,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { t_max: 20.0, samples: 5, dt: 0.0025, sample_every: 1.0 }
    }
}

impl TimeConfig {
    pub fn times(&self) -> Vec<f64> {
        match self.samples {
            0 => vec![],
            1 => vec![self.t_max],
            n => (0..n).map(|i| self.t_max * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub delta: f64,
    /// Exponential-fit window in units of nu^{-1/3} |k|^{-2/3}.
    pub rate_window: [f64; 2],
    pub power_window: [f64; 2],
    pub gevrey_t_max: f64,
    pub two_path_tolerance: f64,
    pub oracle_tolerance: f64,
    /// sup_t ||F(t)||_G / ||F(0)||_G must not exceed this.
    pub gevrey_ratio_max: f64,
    /// Allowed max/min spread of a measured constant across a viscosity sweep.
    pub variation_max: f64,
    /// (target, tolerance) for the log-rate against log-nu slope.
    pub rate_slope: [f64; 2],
    /// (target, tolerance) for the stream-profile power law.
    pub stream_power: [f64; 2],
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            delta: 0.05,
            rate_window: [1.0, 3.0],
            power_window: [5.0, 50.0],
            gevrey_t_max: 50.0,
            two_path_tolerance: 5e-3,
            oracle_tolerance: 1e-3,
            gevrey_ratio_max: 2.0,
            variation_max: 2.0,
            rate_slope: [1.0 / 3.0, 0.1],
            stream_power: [-2.0, 0.3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResolventConfig {
    pub y0: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig { y0: vec![0.0], alpha: vec![0.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub eps: Vec<f64>,
    pub alpha_tilde: Vec<f64>,
    pub y0: f64,
    pub z_range: [f64; 2],
    pub z_points: usize,
    /// Half-width and spacing of the rescaled Y-grid.
    pub y_half: f64,
    pub hy: f64,
    pub band_ratio_max: f64,
    pub residual_max: f64,
    pub functional_floor: f64,
    pub model_tolerance: f64,
    pub oracle_tolerance: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            eps: vec![1e-2, 1e-3, 1e-4],
            alpha_tilde: vec![0.0, 1.0, 10.0],
            y0: 0.0,
            z_range: [-5.0, 5.0],
            z_points: 41,
            y_half: 12.0,
            hy: 1.0 / 32.0,
            band_ratio_max: 10.0,
            residual_max: 0.15,
            functional_floor: -1e-10,
            model_tolerance: 1e-6,
            oracle_tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LapConfig {
    pub eps: Vec<f64>,
    pub alpha_over_eps: Vec<f64>,
    pub y0: Vec<f64>,
    pub half_width: f64,
    pub kappa_floor: f64,
    /// Decreasing |eps| sequence for the distributional-limit check; empty to skip.
    pub limit_eps: Vec<f64>,
    pub limit_y0: f64,
    pub limit_half_width: f64,
    pub limit_tolerance: f64,
}

impl Default for LapConfig {
    fn default() -> Self {
        LapConfig {
            eps: vec![1e-2, 1e-3],
            alpha_over_eps: vec![0.0, 1.0],
            y0: vec![-1.5, -0.5, 0.0, 0.5, 1.5],
            half_width: 4.0,
            kappa_floor: 0.01,
            limit_eps: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            limit_y0: 0.0,
            limit_half_width: 8.0,
            limit_tolerance: 5e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DsrConfig {
    pub half_width: f64,
    /// y spacing; the critical-layer limit is used when absent.
    pub spacing: Option<f64>,
    pub dt: f64,
    pub steps: usize,
    pub lambda_points: usize,
    pub lambda_margin: f64,
    pub cap: f64,
    pub max_dimension: usize,
}

impl Default for DsrConfig {
    fn default() -> Self {
        DsrConfig {
            half_width: 2.0,
            spacing: None,
            dt: 2.5,
            steps: 20,
            lambda_points: 81,
            lambda_margin: 1.0,
            cap: crate::semigroup::DEFAULT_C0_CAP,
            max_dimension: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThetaConfig {
    /// (v, w) grid half-width and spacing for the Gevrey ratio.
    pub v_half: f64,
    pub spacing: f64,
    /// y-grid for the column solves.
    pub y_half_width: f64,
    pub y_spacing: f64,
    pub w_columns: Vec<f64>,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig { v_half: 5.0, spacing: 0.01, y_half_width: 9.0, y_spacing: 0.01, w_columns: vec![-0.8, 0.0, 0.45, 1.3] }
    }
}

/// Complete description of one run. Only `profile` is required; every section has
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub modes: ModeSweep,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub resolvent: ResolventConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub lap: LapConfig,
    #[serde(default)]
    pub dsr: DsrConfig,
    #[serde(default)]
    pub theta: ThetaConfig,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, profile: ProfileSpec) -> Self {
        ExperimentConfig {
            kind: Some(kind),
            threads: 0,
            profile,
            modes: ModeSweep::default(),
            grid: GridConfig::default(),
            time: TimeConfig::default(),
            diagnostics: DiagnosticsConfig::default(),
            initial: InitialData::default(),
            resolvent: ResolventConfig::default(),
            kernel: KernelConfig::default(),
            lap: LapConfig::default(),
            dsr: DsrConfig::default(),
            theta: ThetaConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            // serde names the offending key in backticks
            let field = msg.split('`').nth(1).unwrap_or("<document>").to_string();
            Error::ConfigInvalid { field, msg: msg.trim().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("<file>", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks every field the given experiment uses against the solver preconditions.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(Error::config("kind", format!("config is for `{}`, not `{}`", k.command(), kind.command())));
            }
        }
        let p = self.profile.build().map_err(|e| Error::config("profile", e.to_string()))?;
        use ExperimentKind::*;
        if matches!(kind, Simulate | Resolvent | DsrCheck | FitDecay | ThetaBounds) {
            self.validate_modes()?;
        }
        if matches!(kind, Simulate | Resolvent | FitDecay) {
            self.validate_grid(&p)?;
        }
        match kind {
            Simulate => self.validate_simulate(&p)?,
            Resolvent => {
                let r = &self.resolvent;
                if r.y0.is_empty() || r.y0.iter().any(|y| !self.inside(*y)) {
                    return Err(Error::config("resolvent.y0", "need at least one point inside the grid"));
                }
                if r.alpha.is_empty() || r.alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
                    return Err(Error::config("resolvent.alpha", "values must be finite and non-negative"));
                }
            }
            KernelVerify => self.validate_kernel()?,
            LapScan => self.validate_lap()?,
            DsrCheck => self.validate_dsr(&p)?,
            FitDecay => self.validate_decay(&p)?,
            ThetaBounds => self.validate_theta()?,
        }
        Ok(())
    }

    fn inside(&self, y: f64) -> bool {
        y.is_finite() && y.abs() < self.grid.half_width
    }

    fn validate_modes(&self) -> Result<()> {
        if self.modes.k.is_empty() || self.modes.k.contains(&0) {
            return Err(Error::config("modes.k", "need at least one nonzero wavenumber"));
        }
        if self.modes.nu.is_empty() || self.modes.nu.iter().any(|nu| !(*nu > 0.0 && *nu < 1.0)) {
            return Err(Error::config("modes.nu", "viscosities must lie in (0, 1)"));
        }
        Ok(())
    }

    fn modes(&self) -> Vec<ModeParams> {
        let mut out = Vec::new();
        for &k in &self.modes.k {
            for &nu in &self.modes.nu {
                out.push(ModeParams::new(k, nu).expect("validated"));
            }
        }
        out
    }

    fn validate_grid(&self, p: &ShearProfile) -> Result<()> {
        let g = &self.grid;
        if !(g.half_width > 0.0 && g.half_width.is_finite()) {
            return Err(Error::config("grid.half_width", "must be positive"));
        }
        if !(g.spacing > 0.0 && g.spacing < g.half_width) {
            return Err(Error::config("grid.spacing", "must be positive and below the half-width"));
        }
        for m in self.modes() {
            let limit = critical_spacing(m.eps);
            if g.spacing > limit * (1.0 + 1e-12) {
                return Err(Error::config(
                    "grid.spacing",
                    format!("{} exceeds the critical-layer limit {limit:.4e} for nu = {}, k = {}", g.spacing, m.nu, m.k),
                ));
            }
        }
        let grid = Grid::symmetric(g.half_width, g.spacing);
        self.initial.check_inside(&grid).map_err(|e| Error::config("initial", e.to_string()))?;
        if !(self.initial.width > 0.0 && self.initial.radius > 0.0) {
            return Err(Error::config("initial", "width and radius must be positive"));
        }
        let _ = p;
        Ok(())
    }

    fn max_abs_b(&self, p: &ShearProfile) -> f64 {
        p.b(self.grid.half_width).abs().max(p.b(-self.grid.half_width).abs())
    }

    fn validate_step(&self, p: &ShearProfile) -> Result<()> {
        let t = &self.time;
        if !(t.dt > 0.0) {
            return Err(Error::config("time.dt", "must be positive"));
        }
        let kmax = self.modes.k.iter().map(|k| k.abs()).max().unwrap_or(1) as f64;
        let number = t.dt * kmax * self.max_abs_b(p);
        if number > STEP_LIMIT {
            return Err(Error::config(
                "time.dt",
                format!("dt |k| max|b| = {number:.3e} exceeds {STEP_LIMIT}; use dt <= {:.3e}", STEP_LIMIT / (kmax * self.max_abs_b(p))),
            ));
        }
        Ok(())
    }

    fn validate_simulate(&self, p: &ShearProfile) -> Result<()> {
        let t = &self.time;
        if t.samples == 0 {
            return Err(Error::config("time.samples", "need at least one sample time"));
        }
        if !(t.t_max >= 0.0 && t.t_max.is_finite()) {
            return Err(Error::config("time.t_max", "must be finite and non-negative"));
        }
        self.validate_step(p)?;
        for s in t.times() {
            let steps = (s / t.dt).round();
            if (steps * t.dt - s).abs() > 1e-9 * s.max(1.0) {
                return Err(Error::config("time.samples", format!("sample time {s} is not a multiple of time.dt = {}", t.dt)));
            }
        }
        let g = &self.grid;
        if !(g.w_spacing > 0.0) || !(g.w_margin > 0.0) {
            return Err(Error::config("grid.w_spacing", "w spacing and margin must be positive"));
        }
        let kmax = self.modes.k.iter().map(|k| k.abs()).max().unwrap_or(1) as f64;
        let phase = phase_number(kmax, t.t_max, g.w_spacing);
        if phase > PHASE_LIMIT {
            return Err(Error::config(
                "grid.w_spacing",
                format!("|k| t_max dw = {phase:.3e} exceeds {PHASE_LIMIT}; use dw <= {:.3e}", PHASE_LIMIT / (kmax * t.t_max)),
            ));
        }
        self.validate_diagnostics()
    }

    fn validate_diagnostics(&self) -> Result<()> {
        let d = &self.diagnostics;
        if !(d.delta >= 0.0 && d.delta.is_finite()) {
            return Err(Error::config("diagnostics.delta", "must be finite and non-negative"));
        }
        for (name, w) in [("diagnostics.rate_window", d.rate_window), ("diagnostics.power_window", d.power_window)] {
            if !(w[0] >= 0.0 && w[1] > w[0]) {
                return Err(Error::config(name, "need 0 <= lo < hi"));
            }
        }
        Ok(())
    }

    fn validate_kernel(&self) -> Result<()> {
        let c = &self.kernel;
        if c.eps.is_empty() || c.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::config("kernel.eps", "values must lie in (0, 1)"));
        }
        if c.alpha_tilde.is_empty() || c.alpha_tilde.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::config("kernel.alpha_tilde", "values must be non-negative"));
        }
        if !(c.z_range[1] >= c.z_range[0]) || c.z_points == 0 {
            return Err(Error::config("kernel.z_range", "need lo <= hi and z_points >= 1"));
        }
        if c.alpha_tilde.len() * c.z_points < 10 {
            return Err(Error::config("kernel.z_points", "the scan needs at least 10 columns per eps"));
        }
        if !(c.hy > 0.0) || !(c.y_half > c.z_range[0].abs().max(c.z_range[1].abs()) + 4.0) {
            return Err(Error::config("kernel.y_half", "must exceed max |Z| by at least 4 with positive hy"));
        }
        Ok(())
    }

    fn validate_lap(&self) -> Result<()> {
        let c = &self.lap;
        if self.modes.k.is_empty() || self.modes.k.contains(&0) {
            return Err(Error::config("modes.k", "need at least one nonzero wavenumber"));
        }
        if c.eps.is_empty() || c.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::config("lap.eps", "values must lie in (0, 1)"));
        }
        if c.alpha_over_eps.is_empty() || c.alpha_over_eps.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::config("lap.alpha_over_eps", "factors must be non-negative"));
        }
        if c.y0.is_empty() || c.y0.iter().any(|y| !(y.abs() < c.half_width)) {
            return Err(Error::config("lap.y0", "points must lie inside the half-width"));
        }
        if c.limit_eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) || c.limit_eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("lap.limit_eps", "need a strictly decreasing sequence in (0, 1)"));
        }
        Ok(())
    }

    fn validate_dsr(&self, p: &ShearProfile) -> Result<()> {
        let c = &self.dsr;
        if !(c.half_width > 0.0) {
            return Err(Error::config("dsr.half_width", "must be positive"));
        }
        if !(c.dt > 0.0) || c.steps == 0 {
            return Err(Error::config("dsr.dt", "dt and steps must be positive"));
        }
        if c.lambda_points < 3 {
            return Err(Error::config("dsr.lambda_points", "need at least 3 points"));
        }
        for m in self.modes() {
            let limit = critical_spacing(m.eps);
            let h = c.spacing.unwrap_or(limit);
            if !(h > 0.0) || h > limit * (1.0 + 1e-12) {
                return Err(Error::config("dsr.spacing", format!("{h} exceeds the critical-layer limit {limit:.4e}")));
            }
            let n = Grid::symmetric(c.half_width, h).n;
            if n > c.max_dimension {
                return Err(Error::config("dsr.max_dimension", format!("generator dimension {n} exceeds {}", c.max_dimension)));
            }
        }
        let _ = p;
        Ok(())
    }

    fn validate_decay(&self, p: &ShearProfile) -> Result<()> {
        self.validate_step(p)?;
        if !(self.time.sample_every > 0.0) {
            return Err(Error::config("time.sample_every", "must be positive"));
        }
        let steps = self.time.sample_every / self.time.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps {
            return Err(Error::config("time.sample_every", "must be a multiple of time.dt"));
        }
        self.validate_diagnostics()
    }

    fn validate_theta(&self) -> Result<()> {
        let c = &self.theta;
        if !(c.v_half > 0.0 && c.spacing > 0.0 && c.spacing < c.v_half) {
            return Err(Error::config("theta.spacing", "need 0 < spacing < v_half"));
        }
        if !(c.y_half_width > 0.0 && c.y_spacing > 0.0) {
            return Err(Error::config("theta.y_spacing", "y grid must have positive extent and spacing"));
        }
        let grid = Grid::symmetric(c.y_half_width, c.y_spacing);
        self.initial.check_inside(&grid).map_err(|e| Error::config("initial", e.to_string()))?;
        self.validate_diagnostics()
    }

    fn decay_spec(&self, k: i32) -> DecaySweepSpec {
        DecaySweepSpec {
            k,
            nus: self.modes.nu.clone(),
            half_width: self.grid.half_width,
            spacing: self.grid.spacing,
            dt: self.time.dt,
            sample_every: self.time.sample_every,
            rate_window: self.diagnostics.rate_window,
            power_window: self.diagnostics.power_window,
            delta: self.diagnostics.delta,
            gevrey_t_max: self.diagnostics.gevrey_t_max,
        }
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Configuration the check was evaluated on, e.g. "k=1 nu=1e-3".
    pub subject: String,
    pub measured: f64,
    /// Human-readable acceptance condition.
    pub bound: String,
    pub pass: bool,
}

impl CheckResult {
    fn at_most(name: &str, subject: &str, measured: f64, limit: f64) -> Self {
        CheckResult { name: name.into(), subject: subject.into(), measured, bound: format!("<= {limit:.3e}"), pass: measured <= limit }
    }

    fn below(name: &str, subject: &str, measured: f64, limit: f64) -> Self {
        CheckResult { name: name.into(), subject: subject.into(), measured, bound: format!("< {limit:.3e}"), pass: measured < limit }
    }

    fn at_least(name: &str, subject: &str, measured: f64, limit: f64) -> Self {
        CheckResult { name: name.into(), subject: subject.into(), measured, bound: format!(">= {limit:.3e}"), pass: measured >= limit }
    }

    fn above(name: &str, subject: &str, measured: f64, limit: f64) -> Self {
        CheckResult { name: name.into(), subject: subject.into(), measured, bound: format!("> {limit:.3e}"), pass: measured > limit }
    }

    fn within(name: &str, subject: &str, measured: f64, target: f64, tol: f64) -> Self {
        CheckResult {
            name: name.into(),
            subject: subject.into(),
            measured,
            bound: format!("{target:.4} +/- {tol:.3}"),
            pass: (measured - target).abs() <= tol,
        }
    }

    fn holds(name: &str, subject: &str, ok: bool) -> Self {
        CheckResult { name: name.into(), subject: subject.into(), measured: if ok { 1.0 } else { 0.0 }, bound: "holds".into(), pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Summary of a run. Field order is the JSON key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub checks: Vec<CheckResult>,
    pub files: Vec<FileDigest>,
    pub pass: bool,
}

impl RunManifest {
    pub fn empty(kind: ExperimentKind, config: ExperimentConfig) -> Self {
        RunManifest {
            tool: "shearlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            kind,
            config,
            wall_clock_seconds: 0.0,
            checks: vec![],
            files: vec![],
            pass: true,
        }
    }
}

struct Sink {
    dir: PathBuf,
    files: Vec<FileDigest>,
}

impl Sink {
    fn write(&mut self, name: &str, content: &str) -> Result<()> {
        fs::write(self.dir.join(name), content)?;
        let hash = Sha256::digest(content.as_bytes());
        self.files.push(FileDigest { name: name.into(), bytes: content.len(), sha256: format!("{hash:x}") });
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:.10e}")
}

fn subject(m: &ModeParams) -> String {
    format!("k={} nu={:e}", m.k, m.nu)
}

fn tag(m: &ModeParams) -> String {
    format!("k{}_nu{:e}", m.k, m.nu)
}

/// Validates `config`, runs the experiment, writes artifacts and `manifest.json` into
/// `out` and returns the manifest.
pub fn run_experiment(kind: ExperimentKind, config: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    config.validate(kind)?;
    fs::create_dir_all(out)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let mut sink = Sink { dir: out.to_path_buf(), files: vec![] };
    let p = config.profile.build()?;
    let checks = pool.install(|| -> Result<Vec<CheckResult>> {
        match kind {
            ExperimentKind::Simulate => simulate(config, &p, &mut sink),
            ExperimentKind::Resolvent => resolvent(config, &p, &mut sink),
            ExperimentKind::KernelVerify => kernel_verify(config, &p, &mut sink),
            ExperimentKind::LapScan => lap_scan(config, &p, &mut sink),
            ExperimentKind::DsrCheck => dsr_check(config, &p, &mut sink),
            ExperimentKind::FitDecay => fit_decay(config, &p, &mut sink),
            ExperimentKind::ThetaBounds => theta_bounds(config, &p, &mut sink),
        }
    })?;
    let mut manifest = RunManifest::empty(kind, config.clone());
    manifest.config.kind = Some(kind);
    manifest.pass = checks.iter().all(|c| c.pass);
    manifest.checks = checks;
    manifest.files = sink.files;
    manifest.wall_clock_seconds = start.elapsed().as_secs_f64();
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    Ok(manifest)
}

fn series_csv(s: &EvolutionSeries) -> String {
    let mut out = String::from("t,v,re_f,im_f,re_phi,im_phi\n");
    let prof = s.profiles.as_ref().expect("profiles extracted");
    for (it, &t) in s.times.iter().enumerate() {
        for iv in 0..prof.vgrid.n {
            let (f, phi) = (prof.f_t[it][iv], prof.phi_t[it][iv]);
            let _ = writeln!(out, "{},{},{},{},{},{}", num(t), num(prof.vgrid.x(iv)), num(f.re), num(f.im), num(phi.re), num(phi.im));
        }
    }
    out
}

/// max over times of the relative residual of (D2 - k^2) psi = omega.
fn elliptic_residual(s: &EvolutionSeries) -> f64 {
    let k2 = s.mode.kf().powi(2);
    let h2 = s.grid.h * s.grid.h;
    let zero = C64::new(0.0, 0.0);
    s.omega_t
        .iter()
        .zip(&s.psi_t)
        .map(|(w, psi)| {
            let n = w.len();
            let r: Vec<C64> = (0..n)
                .map(|j| {
                    let l = if j > 0 { psi[j - 1] } else { zero };
                    let rr = if j + 1 < n { psi[j + 1] } else { zero };
                    (l - 2.0 * psi[j] + rr) / h2 - k2 * psi[j] - w[j]
                })
                .collect();
            crate::grid::l2(&r) / crate::grid::l2(w).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

fn simulate(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    let grid = Grid::symmetric(c.grid.half_width, c.grid.spacing);
    let disc = Discretization::new(p, grid.clone());
    let times = c.time.times();
    let wgt_k = |k: i32| GevreyWeight::new(c.diagnostics.delta, k as f64);
    let assume = check_assumptions(p, &grid);
    checks.push(CheckResult::holds(
        "profile assumptions (monotone, compact b'', Gevrey class)",
        &format!("{:?}", p.spec.kind).to_lowercase(),
        assume.slope_min > 0.0 && assume.support_ok && assume.gevrey_ok,
    ));
    let vgrid = Grid::with_spacing(p.b(grid.lo + 0.5), p.b(grid.hi() - 0.5), c.grid.spacing);
    for m in c.modes() {
        let subj = subject(&m);
        let ctx = |e: Error| e.context(format!("simulate {subj}"));
        let wgrid = default_wgrid(&disc, c.grid.w_margin, c.grid.w_spacing);
        let mut rep = evolve_representation(p, &m, &c.initial, &disc, &wgrid, &times).map_err(ctx)?;
        let direct = evolve_direct(&m, &c.initial, &disc, &times, c.time.dt).map_err(ctx)?;
        let two = compare_series(&rep, &direct)?;
        let closed = if p.spec.kind == ProfileKind::Couette {
            let exact = couette_closed_form(&m, &c.initial, &grid, &times).map_err(ctx)?;
            Some((compare_series(&rep, &exact)?, compare_series(&direct, &exact)?))
        } else {
            None
        };
        if times[0] == 0.0 {
            let e0 = rel_l2_diff(&rep.omega_t[0], &c.initial.omega0(&grid));
            checks.push(CheckResult::at_most("representation at t=0 recovers the initial data", &subj, e0, 1e-3));
        }
        let worst = two.iter().cloned().fold(0.0, f64::max);
        checks.push(CheckResult::at_most("two-path agreement (representation vs time stepper)", &subj, worst, c.diagnostics.two_path_tolerance));
        if let Some((a, b)) = &closed {
            let worst = a.iter().chain(b).cloned().fold(0.0, f64::max);
            checks.push(CheckResult::at_most("Couette closed-form oracle (both paths)", &subj, worst, c.diagnostics.oracle_tolerance));
        }
        checks.push(CheckResult::at_most("elliptic consistency, time stepper", &subj, elliptic_residual(&direct), 1e-10));
        let stream = rep
            .omega_t
            .iter()
            .zip(&rep.psi_t)
            .map(|(w, psi)| Ok(rel_l2_diff(psi, &poisson_solve(m.k, &grid, w)?)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(CheckResult::at_most(
            "representation stream function vs elliptic solve of its vorticity",
            &subj,
            stream,
            c.diagnostics.two_path_tolerance,
        ));

        extract_profiles(&mut rep, p, &vgrid).map_err(ctx)?;
        let prof = rep.profiles.as_ref().expect("profiles");
        let wgt = wgt_k(m.k);
        let gev: Vec<f64> = prof.f_t.iter().map(|f| gevrey_norm_1d(f, vgrid.h, &wgt)).collect::<Result<_>>().map_err(ctx)?;
        let g0 = gevrey_norm_1d(&c.initial.f0(p, &vgrid)?, vgrid.h, &wgt)?;
        let gmax = gev.iter().cloned().fold(0.0, f64::max);
        checks.push(CheckResult::at_most("uniform Gevrey bound of the vorticity profile", &subj, gmax / g0, c.diagnostics.gevrey_ratio_max));

        let norms = crate::evolution::profile_norms(&rep, p);
        let mut table = String::from("t,l2_f,gevrey_f,l2_phi\n");
        for (r, g) in norms.iter().zip(&gev) {
            let _ = writeln!(table, "{},{},{},{}", num(r.t), num(r.l2_f), num(*g), num(r.l2_phi));
        }
        sink.write(&format!("norms_{}.csv", tag(&m)), &table)?;
        let mut paths = String::from("t,representation_vs_direct,representation_vs_closed_form,direct_vs_closed_form\n");
        for (i, &t) in times.iter().enumerate() {
            let (a, b) = closed.as_ref().map_or((f64::NAN, f64::NAN), |(a, b)| (a[i], b[i]));
            let _ = writeln!(paths, "{},{},{},{}", num(t), num(two[i]), num(a), num(b));
        }
        sink.write(&format!("paths_{}.csv", tag(&m)), &paths)?;
        sink.write(&format!("series_{}.csv", tag(&m)), &series_csv(&rep))?;
    }
    Ok(checks)
}

fn resolvent(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    let disc = Discretization::new(p, Grid::symmetric(c.grid.half_width, c.grid.spacing));
    let f = c.initial.omega0(&disc.grid);
    let mut csv = String::from("k,nu,y0,alpha,y,re_w,im_w,re_psi,im_psi\n");
    for m in c.modes() {
        for &y0 in &c.resolvent.y0 {
            for &alpha in &c.resolvent.alpha {
                let subj = format!("{} y0={y0} alpha={alpha}", subject(&m));
                let q = ResolventQuery::new(m.eps, alpha * m.eps.signum(), y0)?;
                let sol = os_resolvent_solve_with(p, &m, &q, &disc, &f, SolveStrategy::Banded).map_err(|e| e.context(subj.clone()))?;
                let alt = os_resolvent_solve_with(p, &m, &q, &disc, &f, SolveStrategy::Woodbury).map_err(|e| e.context(subj.clone()))?;
                checks.push(CheckResult::at_most("resolvent residual", &subj, sol.residual, RESIDUAL_LIMIT));
                checks.push(CheckResult::at_most(
                    "banded and low-rank-update strategies agree",
                    &subj,
                    rel_l2_diff(&sol.w, &alt.w),
                    1e-8,
                ));
                for j in 0..disc.n() {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{},{}",
                        m.k,
                        num(m.nu),
                        num(y0),
                        num(alpha),
                        num(disc.grid.x(j)),
                        num(sol.w[j].re),
                        num(sol.w[j].im),
                        num(sol.psi[j].re),
                        num(sol.psi[j].im)
                    );
                }
            }
        }
    }
    sink.write("resolvent.csv", &csv)?;
    Ok(checks)
}

fn kernel_verify(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let kc = &c.kernel;
    let mut checks = Vec::new();
    let zs: Vec<f64> = if kc.z_points == 1 {
        vec![kc.z_range[0]]
    } else {
        (0..kc.z_points).map(|i| kc.z_range[0] + (kc.z_range[1] - kc.z_range[0]) * i as f64 / (kc.z_points - 1) as f64).collect()
    };
    let mut diag_csv = String::from("eps,alpha_tilde,z,diagonal\n");
    let mut env_csv = String::from("eps,diagonal_ratio,offdiag_rate,offdiag_residual,derivative_rate,c0,min_functional\n");
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for &eps in &kc.eps {
        let subj = format!("eps={eps:e}");
        let cols = rescaled_kernel_scan(p, eps, kc.y0, &kc.alpha_tilde, &zs, kc.y_half, kc.hy)?;
        let rep = verify_airy_bounds(&cols, EnvelopeStyle::Full)?;
        for col in &cols {
            let r = col.rescaled()?;
            let d = r.values[r.z_index].norm() * bracket(r.alpha, r.z).sqrt();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
            let _ = writeln!(diag_csv, "{},{},{},{}", num(eps), num(r.alpha), num(r.z), num(d));
        }
        let ent = rep.entanglement.as_ref().expect("full style");
        let _ = writeln!(
            env_csv,
            "{},{},{},{},{},{},{}",
            num(eps),
            num(rep.diagonal_ratio),
            num(rep.offdiag_rate),
            num(rep.offdiag_relative_residual),
            num(rep.derivative_rate),
            num(ent.c0),
            num(ent.min_functional)
        );
        checks.push(CheckResult::above("off-diagonal envelope decay rate", &subj, rep.offdiag_rate, 0.0));
        checks.push(CheckResult::below("off-diagonal envelope fit residual", &subj, rep.offdiag_relative_residual, kc.residual_max));
        checks.push(CheckResult::at_least("entanglement functional at fitted c0", &subj, ent.min_functional, kc.functional_floor));

        // Couette column against the explicit Airy-function formula
        let l = eps.cbrt();
        let grid = Grid::symmetric(16.0 * l, l / 64.0);
        let couette = ShearProfile::couette();
        let mut err: f64 = 0.0;
        for &zt in &[0.0, 1.0] {
            let q = ResolventQuery::new(eps, 0.0, 0.0)?;
            let col = airy_kernel_column(&couette, &q, &grid, zt * l)?;
            let scale = col.values[col.source_index].norm();
            for j in 0..grid.n {
                let y = grid.x(j);
                if (y - col.source).abs() <= 10.0 * l {
                    let e = couette_kernel_explicit(eps, 0.0, 0.0, y, col.source);
                    err = err.max((col.values[j] - e).norm() / scale);
                }
            }
        }
        checks.push(CheckResult::at_most("Couette kernel matches the explicit formula", &subj, err, kc.oracle_tolerance));
    }
    checks.insert(0, CheckResult::at_most("diagonal band max/min over the scan", "all eps", dmax / dmin, kc.band_ratio_max));
    let gamma_third = 2.678_938_534_707_747_6;
    let w0 = model_airy_w_at(0.0, 0.0);
    let exact = -(3f64).powf(-2.0 / 3.0) * gamma_third;
    checks.push(CheckResult::at_most("model Airy W(0) at zero damping", "alpha~=0", (w0 - exact).norm(), kc.model_tolerance));
    sink.write("kernel_diagonal.csv", &diag_csv)?;
    sink.write("kernel_envelopes.csv", &env_csv)?;
    Ok(checks)
}

fn lap_scan(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let lc = &c.lap;
    let mut checks = Vec::new();
    let mut csv = String::from("k,eps,alpha,y0,kappa,coupling_norm\n");
    for &k in &c.modes.k {
        let spec = LapScanSpec { k, eps: lc.eps.clone(), alpha_over_eps: lc.alpha_over_eps.clone(), y0: lc.y0.clone(), half_width: lc.half_width };
        let r = lap_kappa_scan(p, &spec)?;
        for pt in &r.points {
            let _ = writeln!(csv, "{},{},{},{},{},{}", k, num(pt.eps), num(pt.alpha), num(pt.y0), num(pt.kappa), num(pt.coupling_norm));
        }
        let subj = format!("k={k}");
        if p.spec.kind == ProfileKind::Couette {
            checks.push(CheckResult::holds("kappa is exactly 1 without coupling", &subj, r.kappa_min == 1.0));
        } else {
            checks.push(CheckResult::above("smallest kappa over the scan", &subj, r.kappa_min, lc.kappa_floor));
        }
        checks.push(CheckResult::at_most("kappa spread across eps", &subj, r.eps_variation, c.diagnostics.variation_max));
    }
    sink.write("lap_points.csv", &csv)?;
    if !lc.limit_eps.is_empty() {
        let g = |y: f64| (-y * y).exp();
        let plus = pv_delta_limit_check(p, g, g, lc.limit_y0, &lc.limit_eps, lc.limit_half_width)?;
        let neg: Vec<f64> = lc.limit_eps.iter().map(|e| -e).collect();
        let minus = pv_delta_limit_check(p, g, g, lc.limit_y0, &neg, lc.limit_half_width)?;
        let mut csv = String::from("eps,re_value,im_value,error\n");
        for r in [&plus, &minus] {
            for ((e, v), err) in r.eps.iter().zip(&r.values).zip(&r.errors) {
                let _ = writeln!(csv, "{},{},{},{}", num(*e), num(v.re), num(v.im), num(*err));
            }
        }
        sink.write("limits.csv", &csv)?;
        for (r, side) in [(&plus, "eps>0"), (&minus, "eps<0")] {
            checks.push(CheckResult::holds("distributional-limit errors decrease", side, r.decreasing));
            checks.push(CheckResult::at_most("distributional-limit final error", side, r.final_error, lc.limit_tolerance));
        }
        let (a, b) = (plus.values.last().expect("values").re, minus.values.last().expect("values").re);
        let flip = plus.sign_consistent && minus.sign_consistent && (plus.delta_weight == 0.0 || a * b < 0.0);
        checks.push(CheckResult::holds("delta term flips sign between eps>0 and eps<0", "both sides", flip));
    }
    Ok(checks)
}

fn dsr_check(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let dc = &c.dsr;
    let mut checks = Vec::new();
    let mut norms = String::from("k,nu,t,norm\n");
    let mut sigmas = String::from("k,nu,lambda,sigma_min\n");
    let mut summary = String::from("k,nu,dimension,m,mu,c0_required,lambda_min\n");
    let mut scaled = Vec::new();
    for m in c.modes() {
        let subj = subject(&m);
        let h = dc.spacing.unwrap_or_else(|| critical_spacing(m.eps));
        let grid = Grid::symmetric(dc.half_width, h);
        let g = discretize_generator(p, &m, &grid)?;
        let lams = default_lambda_grid(&g, dc.lambda_margin, dc.lambda_points);
        let r = dsr_envelope_check(&g, dc.dt, dc.steps, &lams, dc.cap).map_err(|e| e.context(subj.clone()))?;
        for (t, v) in r.times.iter().zip(&r.norms) {
            let _ = writeln!(norms, "{},{},{},{}", m.k, num(m.nu), num(*t), num(*v));
        }
        for (l, s) in r.lambdas.iter().zip(&r.sigmas) {
            let _ = writeln!(sigmas, "{},{},{},{}", m.k, num(m.nu), num(*l), num(*s));
        }
        let _ = writeln!(summary, "{},{},{},{},{},{},{}", m.k, num(m.nu), grid.n, num(r.m), num(r.mu), num(r.c0_required), num(r.lambda_min));
        checks.push(CheckResult::at_most("envelope constant C0 required", &subj, r.c0_required, dc.cap));
        let x = m.nu.cbrt() * m.kf().abs().powf(2.0 / 3.0);
        scaled.push((x, r.mu));
    }
    let c_fit = scaled.iter().map(|(x, mu)| x * mu).sum::<f64>() / scaled.iter().map(|(x, _)| x * x).sum::<f64>();
    let c_min = scaled.iter().map(|(x, mu)| mu / x).fold(f64::INFINITY, f64::min);
    checks.push(CheckResult::above("fitted c in mu >= c nu^(1/3) |k|^(2/3)", "all modes", c_fit, 0.0));
    checks.push(CheckResult::above("smallest mu / (nu^(1/3) |k|^(2/3))", "all modes", c_min, 0.0));
    sink.write("dsr_norms.csv", &norms)?;
    sink.write("dsr_resolvent.csv", &sigmas)?;
    sink.write("dsr_summary.csv", &summary)?;
    Ok(checks)
}

fn fit_decay(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let d = &c.diagnostics;
    let mut checks = Vec::new();
    let mut norms = String::from("k,nu,t,l2_f,l2_phi\n");
    let mut fits = String::from("k,nu,rate,rate_residual,gevrey_ratio,phi_power,phi_residual\n");
    for &k in &c.modes.k {
        let sweep = decay_sweep(p, &c.initial, &c.decay_spec(k)).map_err(|e| e.context(format!("fit-decay k={k}")))?;
        for row in &sweep.rows {
            for r in &row.norms {
                let _ = writeln!(norms, "{},{},{},{},{}", k, num(row.nu), num(r.t), num(r.l2_f), num(r.l2_phi));
            }
            let _ = writeln!(
                fits,
                "{},{},{},{},{},{},{}",
                k,
                num(row.nu),
                num(row.rate),
                num(row.rate_residual),
                num(row.gevrey_ratio),
                num(row.phi_power),
                num(row.phi_residual)
            );
            let subj = format!("k={k} nu={:e}", row.nu);
            checks.push(CheckResult::above("enhanced dissipation rate", &subj, row.rate, 0.0));
            checks.push(CheckResult::within("stream profile power law", &subj, row.phi_power, d.stream_power[0], d.stream_power[1]));
        }
        let subj = format!("k={k}");
        if let Some(slope) = sweep.rate_slope {
            checks.push(CheckResult::within("enhanced dissipation: log-rate vs log-nu slope", &subj, slope, d.rate_slope[0], d.rate_slope[1]));
        }
        checks.push(CheckResult::below("uniform Gevrey bound spread across nu", &subj, sweep.gevrey_variation, d.variation_max));
    }
    sink.write("decay_norms.csv", &norms)?;
    sink.write("decay_fits.csv", &fits)?;
    Ok(checks)
}

fn theta_bounds(c: &ExperimentConfig, p: &ShearProfile, sink: &mut Sink) -> Result<Vec<CheckResult>> {
    let tc = &c.theta;
    let mut checks = Vec::new();
    let vgrid = Grid::symmetric(tc.v_half, tc.spacing);
    let f0 = c.initial.f0(p, &vgrid)?;
    let mut ratios_csv = String::from("k,nu,theta_norm,f0_norm,ratio\n");
    let mut cols_csv = String::from("k,nu,w,relative_difference,h1_ratio\n");
    for &k in &c.modes.k {
        let wgt = GevreyWeight::new(c.diagnostics.delta, k as f64);
        let den = gevrey_norm_1d(&f0, vgrid.h, &wgt)?;
        let mut ratios = Vec::new();
        for &nu in &c.modes.nu {
            let m = ModeParams::new(k, nu)?;
            let subj = subject(&m);
            let disc = Discretization::new(p, Grid::symmetric(tc.y_half_width, tc.y_spacing.min(critical_spacing(m.eps))));
            let field = spectral_density(p, &m, &c.initial, &disc, &vgrid, &vgrid).map_err(|e| e.context(subj.clone()))?;
            let numr = gevrey_norm_2d(&field.theta, vgrid.h, vgrid.h, &wgt, true)?;
            let _ = writeln!(ratios_csv, "{},{},{},{},{}", k, num(nu), num(numr), num(den), num(numr / den));
            ratios.push(numr / den);
            let columns = DensityColumns::new(p, m, &disc, &c.initial)?;
            let mut worst: f64 = 0.0;
            for &w in &tc.w_columns {
                let direct = columns.solve(w)?;
                let integral = theta_integral_solve(p, &m, &c.initial, &disc, w)?;
                let d = rel_l2_diff(&integral.theta, &direct.psi);
                worst = worst.max(d);
                let _ = writeln!(cols_csv, "{},{},{},{},{}", k, num(nu), num(w), num(d), num(integral.h1_ratio));
            }
            checks.push(CheckResult::at_most("Theta integral form vs direct solve (worst column)", &subj, worst, c.diagnostics.two_path_tolerance));
        }
        let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(CheckResult::below("Theta Gevrey ratio spread across nu", &format!("k={k}"), spread, c.diagnostics.variation_max));
    }
    sink.write("theta_gevrey.csv", &ratios_csv)?;
    sink.write("theta_columns.csv", &cols_csv)?;
    Ok(checks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    TextTable,
}

const TABLE_HEADER: &str = "status | check | subject | measured | bound";

/// Renders the manifest; the text table has one row per check under a fixed header.
pub fn emit_report(m: &RunManifest, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(m).expect("manifest serializes"),
        ReportFormat::TextTable => {
            let mut s = format!("{TABLE_HEADER}\n");
            for c in &m.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{status} | {} | {} | {:.4e} | {}", c.name, c.subject, c.measured, c.bound);
            }
            s
        }
    }
}

/// Writes `report.json` or `report.txt` into `dir`.
pub fn write_report(m: &RunManifest, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    let name = match format {
        ReportFormat::Json => "report.json",
        ReportFormat::TextTable => "report.txt",
    };
    let path = dir.join(name);
    fs::write(&path, emit_report(m, format))?;
    Ok(path)
}
