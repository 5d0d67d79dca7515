//! Shared error type for all modules.

use thiserror::Error;

/// Last iterate of a failed nonlinear solve, kept for diagnosis.
#[derive(Debug, Clone)]
pub struct FailedIterate {
    pub values: Vec<f64>,
    pub residual: f64,
    pub eps: f64,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("point has dimension {got}, domain expects {expected}")]
    WrongDimension { expected: usize, got: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("fields live on different meshes and cannot be resampled")]
    MeshMismatch,

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e}, eps {eps:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        eps: f64,
        last: Box<FailedIterate>,
    },

    #[error("positivity safeguard exhausted at node {node}")]
    NegativeIterate { node: usize },

    #[error("operation undefined in this singular regime: {0}")]
    RegimeError(String),

    #[error("eigenfunction not sup-normalized (max {max})")]
    NormalizationError { max: f64 },

    #[error("argument outside admissible range: {0}")]
    DomainError(String),

    #[error("window [{d_min:.3e}, {d_max:.3e}] holds {found} samples, need at least {need}")]
    WindowUnresolved {
        d_min: f64,
        d_max: f64,
        found: usize,
        need: usize,
    },

    #[error("reflection of a cap node leaves the domain")]
    ReflectionLeavesDomain,

    #[error("domain is not symmetric with respect to the requested hyperplane")]
    AsymmetricDomain,

    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
}

pub type Result<T> = std::result::Result<T, Error>;
