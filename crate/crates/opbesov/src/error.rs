use crate::quadrature::QuadError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not non-negative: {0}")]
    NotNonNegative(String),
    #[error("operator is not injective (smallest singular value {sigma_min:e}, largest {sigma_max:e})")]
    NotInjective { sigma_min: f64, sigma_max: f64 },
    #[error("operator has no spectral data")]
    NoSpectralData,
    #[error("semigroup unavailable: {0}")]
    SemigroupUnavailable(String),
    #[error("cannot parse operator spec: {0}")]
    Parse(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("tail not certified within |j| <= {cap}: bound {bound:e}, value {value:e}")]
    TailNotCertified { cap: i32, bound: f64, value: f64 },
    #[error("non-negativity constants diverge at the {end} end of the grid")]
    Divergent { end: &'static str },
    #[error("sequence did not converge: {0}")]
    NotConvergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
