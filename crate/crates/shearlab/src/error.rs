use thiserror::Error;

/// Errors raised by the solvers and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("monotonicity violation: min b' = {min_slope:.6e} <= 0")]
    MonotonicityViolation { min_slope: f64 },
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("critical layer unresolved: h = {h:.3e} > |eps|^(1/3)/8 = {limit:.3e}")]
    CriticalLayerUnresolved { h: f64, limit: f64 },
    #[error("sign violation: eps*alpha = {0:.3e} < 0")]
    SignViolation(f64),
    #[error("coupling system singular at w = {w:.6}: {detail}")]
    CouplingSingular { w: f64, detail: String },
    #[error("dense system singular: {0}")]
    DenseSystemSingular(String),
    #[error("insufficient scan: {got} columns, need at least {need}")]
    InsufficientScan { got: usize, need: usize },
    #[error("phase under-resolved: |k| t_max dw = {0:.3e} > 0.1")]
    PhaseUnderresolved(f64),
    #[error("step too large: dt |k| max|b| = {0:.3e} > 0.1")]
    StepTooLarge(f64),
    #[error("aliasing risk: spectrum at Nyquist / peak = {0:.3e}")]
    AliasingRisk(f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("regularization unconverged: R-doubling change {0:.3e}")]
    RegularizationUnconverged(f64),
    #[error("near singular: sigma_min = {sigma:.3e} at lambda = {lambda:.6}")]
    NearSingular { sigma: f64, lambda: f64 },
    #[error("overflow risk: |A| t = {0:.3e} exceeds cap")]
    OverflowRisk(f64),
    #[error("invalid config field `{field}`: {msg}")]
    ConfigInvalid { field: String, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    pub fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::ConfigInvalid { field: field.to_string(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
