use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParams { family: String, reason: String },

    #[error("index {index} is outside the support of {family} (last valid index {last})")]
    OutOfDomain {
        family: String,
        index: usize,
        last: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerically singular: {0}")]
    Singular(String),

    #[error("almost-Toeplitz hypotheses not met: {0}")]
    NotApplicable(String),

    #[error("truncation margin {margin} is below n^(alpha/2) = {required:.3}")]
    WindowTooSmall { margin: usize, required: f64 },

    #[error("quadrature stalled: error estimate {estimate:.3e} above tolerance {tol:.3e}")]
    NoConvergence { estimate: f64, tol: f64 },

    #[error("design matrix condition number {0:.3e} exceeds 1e12")]
    IllConditioned(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line runner: 2 for bad configuration, 1 for
    /// numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParams { .. }
            | Error::InvalidInput(_)
            | Error::Unsupported(_)
            | Error::Config(_)
            | Error::Json(_)
            | Error::WindowTooSmall { .. } => 2,
            _ => 1,
        }
    }

    pub(crate) fn params(family: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            family: family.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
