//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or input failed validation before any computation ran.
    #[error("invalid {what}: {detail}")]
    InvalidArgument { what: &'static str, detail: String },

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// The time stepper produced a NaN or infinity. `step` is the 1-based
    /// index of the step that failed.
    #[error("forward solve produced a non-finite value at time step {step}")]
    NonFiniteStep { step: usize },

    /// The tridiagonal elimination hit a vanishing pivot. Impossible for
    /// valid inputs; treated as an internal error.
    #[error("tridiagonal solve broke down at time step {step} (pivot {pivot:e})")]
    TridiagonalBreakdown { step: usize, pivot: f64 },

    #[error(
        "covariance factorization failed for length_scale={length_scale}, \
         amplitude={amplitude}, {n} nodes, even with jitter {max_jitter:e}"
    )]
    CovarianceFactorization {
        length_scale: f64,
        amplitude: f64,
        n: usize,
        max_jitter: f64,
    },

    /// Configuration file or CLI validation failure (exit code 1).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit code for the CLI: 1 for validation problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
