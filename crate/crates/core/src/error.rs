use thiserror::Error;

/// Errors raised by the discretization, the time stepper and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration ({assumption}): {message}")]
    InvalidConfig {
        assumption: &'static str,
        message: String,
    },

    #[error("fixed-point solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("sample {sample}, level {level}: {source}")]
    SampleFailed {
        sample: usize,
        level: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unsupported norm order {0} (expected -1, 0 or 1)")]
    UnsupportedNorm(i32),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("degenerate experiment: {0}")]
    Degenerate(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(assumption: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            assumption,
            message: message.into(),
        }
    }

    /// Innermost cause, looking through step/sample context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::StepFailed { source, .. } | Error::SampleFailed { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
