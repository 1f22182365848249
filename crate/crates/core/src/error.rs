//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {t} is not a member of the time scale window")]
    PointNotInScale { t: f64 },

    #[error("point {t} is the window maximum; forward jump is undefined")]
    WindowEdge { t: f64 },

    #[error("non-finite value encountered at t = {t}")]
    NonFiniteValue { t: f64 },

    #[error("integration bounds reversed: a = {a} > b = {b}")]
    ReversedBounds { a: f64, b: f64 },

    #[error("quadrature failed to reach tolerance on [{a}, {b}] within the evaluation budget")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("ODE integration failed on [{a}, {b}]: {reason}")]
    IntegrationFailure { a: f64, b: f64, reason: String },

    #[error("regressivity violated at t = {t} (|1 + mu p| or |det(I + mu A)| = {modulus:e})")]
    RegressivityViolation { t: f64, modulus: f64 },

    #[error("({s}, {t}) lies outside the domain of the {direction} shift")]
    OutOfDomain { direction: &'static str, s: f64, t: f64, step: Option<usize> },

    #[error("iteration cap of {cap} exceeded while locating t = {t}")]
    IterationCapExceeded { cap: usize, t: f64 },

    #[error("matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("eigenvalue clusters closer than {separation:e} cannot be separated")]
    ClusteringAmbiguous { separation: f64 },

    #[error("Hilger frequency {omega} lies outside the strip (-pi/mu, pi/mu] for mu = {mu}")]
    OmegaOutOfStrip { omega: f64, mu: f64 },

    #[error("multiplier {modulus:e} is numerically zero")]
    DegenerateMultiplier { modulus: f64 },

    #[error("exponent root finding failed (residual {residual:e})")]
    RootFindFailure { residual: f64 },

    #[error("I - M is singular (|det| = {det:e}); a homogeneous periodic solution exists")]
    ResonantSystem { det: f64 },

    #[error("empty stability horizon [{h}, {t_max}]")]
    EmptyHorizon { h: f64, t_max: f64 },

    #[error("syntax error at position {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },

    #[error("unknown function `{name}` at position {position}")]
    UnknownFunction { name: String, position: usize },

    #[error("unbound variable `{name}`")]
    UnboundVariable { name: String },

    #[error("{function}({arg}) is outside the function domain")]
    DomainError { function: &'static str, arg: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("periodicity verification failed: {0}")]
    Periodicity(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    /// Wraps the error with the module/operation/time where it surfaced.
    pub fn context(self, context: impl Into<String>) -> Error {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
