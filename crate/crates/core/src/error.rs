use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error_estimate:e}, requested {requested:e}")]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        requested: f64,
    },

    /// Configuration values violate an invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Mesh construction or validation failure.
    #[error("mesh error: {0}")]
    Mesh(String),

    /// A mesh file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The linear system is singular or too ill-conditioned to solve.
    #[error("linear system is singular or ill-conditioned (condition estimate {condition_estimate:e})")]
    Singular { condition_estimate: f64 },

    /// The iterative solver hit its iteration limit.
    #[error("iterative solver stalled after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    /// Evaluation point coincides with a point source.
    #[error("evaluation point coincides with a source at {0:?}")]
    SingularPoint([f64; 3]),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
