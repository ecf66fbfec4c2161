//! Vectors of the ambient space and their norms.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    #[default]
    Euclidean,
    /// ℓ_p with p ∈ (0, ∞]; `f64::INFINITY` is the max norm.
    PNorm(f64),
    /// (Σ wᵢ|xᵢ|²)^{1/2} with positive weights.
    Weighted(Vec<f64>),
}

impl NormKind {
    pub fn norm(&self, v: &DVector<Complex64>) -> f64 {
        match self {
            NormKind::Euclidean => v.norm(),
            NormKind::PNorm(p) => p_norm(v.iter().map(|z| z.norm()), *p),
            NormKind::Weighted(w) => v.iter().zip(w).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Modulus of the quasi-triangle inequality.
    pub fn triangle_constant(&self) -> f64 {
        match self {
            NormKind::PNorm(p) if *p < 1.0 => 2f64.powf(1.0 / p - 1.0),
            _ => 1.0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormKind::Euclidean => Ok(()),
            NormKind::PNorm(p) if *p > 0.0 => Ok(()),
            NormKind::PNorm(p) => Err(Error::Inadmissible(format!("p-norm exponent {p} must be positive"))),
            NormKind::Weighted(w) if w.len() != dim => Err(Error::DimensionMismatch { expected: dim, got: w.len() }),
            NormKind::Weighted(w) if w.iter().all(|v| *v > 0.0 && v.is_finite()) => Ok(()),
            NormKind::Weighted(_) => Err(Error::Inadmissible("weights must be positive".into())),
        }
    }
}

pub(crate) fn p_norm(mags: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        mags.fold(0.0, f64::max)
    } else {
        mags.map(|m| m.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// An element of the ambient space ℂⁿ together with the norm it is measured in.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    pub values: DVector<Complex64>,
    pub norm_kind: NormKind,
}

impl Vector {
    pub fn new(values: DVector<Complex64>) -> Self {
        Vector { values, norm_kind: NormKind::Euclidean }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Vector::new(DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))))
    }

    pub fn from_complex(values: &[Complex64]) -> Self {
        Vector::new(DVector::from_column_slice(values))
    }

    pub fn zeros(n: usize) -> Self {
        Vector::new(DVector::zeros(n))
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = DVector::zeros(n);
        v[i] = Complex64::new(1.0, 0.0);
        Vector::new(v)
    }

    pub fn with_norm(mut self, kind: NormKind) -> Self {
        self.norm_kind = kind;
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm_kind.norm(&self.values)
    }

    /// Same norm kind, new values.
    pub fn like(&self, values: DVector<Complex64>) -> Vector {
        Vector { values, norm_kind: self.norm_kind.clone() }
    }

    pub fn scaled(&self, c: Complex64) -> Vector {
        self.like(&self.values * c)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.like(&self.values - &other.values)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.like(&self.values + &other.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let v = Vector::from_real(&[3.0, -4.0]);
        assert_eq!(v.norm(), 5.0);
        assert_eq!(v.clone().with_norm(NormKind::PNorm(1.0)).norm(), 7.0);
        assert_eq!(v.clone().with_norm(NormKind::PNorm(f64::INFINITY)).norm(), 4.0);
        assert!((v.with_norm(NormKind::Weighted(vec![1.0, 0.25])).norm() - 13f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quasi_triangle_constant() {
        assert_eq!(NormKind::PNorm(0.5).triangle_constant(), 2.0);
        assert_eq!(NormKind::Euclidean.triangle_constant(), 1.0);
    }
}
