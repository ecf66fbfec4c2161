pub mod besov;
pub mod error;
pub mod fourier;
pub mod fractional;
pub mod gamma;
pub mod harness;
pub mod interpolation;
pub mod operator;
pub mod opspec;
pub mod quadrature;
pub mod vector;

pub use error::{Error, Result};
pub use operator::{Operator, OperatorKind};
pub use quadrature::{QuadratureRule, QuadratureScheme};
pub use vector::{NormKind, Vector};
