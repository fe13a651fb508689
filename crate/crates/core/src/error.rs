use thiserror::Error;

use crate::symplectic::InvalidReason;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid Gaussian state: {0}")]
    InvalidState(InvalidReason),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("{what}: negative value {value:.3e} below rounding floor {floor:.1e}")]
    NegativeRadicand { what: &'static str, value: f64, floor: f64 },

    #[error("state is outside the supported class: {0}")]
    Unsupported(String),

    #[error(
        "truncated reconstruction rejected: trace defect {trace_defect:.3e}, clipped mass {clip_mass:.3e} \
         (tolerance {tolerance:.1e}); increase the Fock cutoff"
    )]
    Truncation { trace_defect: f64, clip_mass: f64, tolerance: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
