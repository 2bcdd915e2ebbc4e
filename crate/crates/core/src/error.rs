use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the conjugation engine, the measures and the verifiers.
///
/// `Hypothesis` is reserved for "this theorem does not apply to this input"
/// (the suite runner records those as skips). Everything else is a numerical
/// or usage failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("strict convexity violated at {point:?} (smallest Hessian eigenvalue {min_eigenvalue:e})")]
    NotStrictlyConvex { point: Vec<f64>, min_eigenvalue: f64 },

    #[error("superlinearity probe failed along direction {direction:?}")]
    NotSuperlinear { direction: Vec<f64> },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { iterations: usize, residual: f64 },

    #[error("singular Hessian at {point:?}")]
    SingularHessian { point: Vec<f64> },

    #[error("empty effective domain")]
    EmptyDomain,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for theorem-precondition failures, as opposed to numerical errors.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            Error::Hypothesis(_) | Error::NotStrictlyConvex { .. } | Error::NotSuperlinear { .. }
        )
    }
}
