use thiserror::Error;

/// Errors raised by parameter handling and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate `{name}` must be positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("eta0 must be exactly 0 or 1, got {0}")]
    InvalidSwitch(f64),

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("unknown key `{key}`{}", line_suffix(*.line))]
    UnknownKey { key: String, line: Option<usize> },

    #[error("value `{raw}` for key `{key}` is not a finite number{}", line_suffix(*.line))]
    BadNumber { key: String, raw: String, line: Option<usize> },

    #[error("line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("step size underflow at t = {t}: dt = {dt:e}")]
    StepSizeUnderflow { t: f64, dt: f64 },

    #[error("linear system is singular or ill-conditioned (residual {residual:e})")]
    SingularSystem { residual: f64 },

    #[error(
        "probe-pump detuning is zero (degenerate pump-probe); the harmonic expansion does not \
         apply, use the time-domain integrator instead"
    )]
    DegenerateDetuning,

    #[error("harmonic expansion not converged at order {order}: tail norm {tail:e}")]
    NotConverged { order: usize, tail: f64 },

    #[error("expected at least two spectral extrema, found {found}")]
    PeaksNotFound { found: usize },

    #[error("parameters outside the supported regime: {0}")]
    RegimeViolation(String),

    #[error("denominator vanishes (pole of the linear response)")]
    ZeroDenominator,

    #[error("pump amplitude G must be nonzero")]
    ZeroPump,

    #[error("at {name} = {value}: {source}")]
    AtGridPoint { name: String, value: f64, source: Box<Error> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

pub type Result<T> = std::result::Result<T, Error>;
