//! Non-negative operators on ℂⁿ: constructors, action, shifted resolvents, spectral data
//! and the non-negativity constants M_A = sup ‖λ(λ+A)⁻¹‖, L_A = sup ‖A(λ+A)⁻¹‖.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierGrid;
use crate::quadrature::{golden_section, QuadratureScheme};
use crate::vector::{NormKind, Vector};

pub type C64 = Complex64;

/// Relative threshold on singular values below which an operator counts as non-injective.
pub const INJECTIVITY_TOL: f64 = 1e-10;
/// Relative threshold for treating a dense matrix as Hermitian.
const HERMITIAN_TOL: f64 = 1e-13;
const POWER_ITERATIONS: usize = 50;
const POWER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    DenseMatrix,
    Diagonal,
    TorusLaplacian { grid_size: usize, dims: usize },
    Shifted { base: Box<OperatorKind>, epsilon: f64 },
    Inverse { base: Box<OperatorKind> },
    FracPower { base: Box<OperatorKind>, exponent: f64 },
}

/// Eigenvector transform pair of a normal operator.
#[derive(Debug, Clone)]
pub enum Basis {
    Standard,
    Fourier(FourierGrid),
    Unitary(DMatrix<C64>),
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Non-negative eigenvalues, in the order of the basis.
    pub eigenvalues: Vec<f64>,
    pub basis: Basis,
}

impl SpectralData {
    pub fn to_eigen(&self, x: &DVector<C64>) -> DVector<C64> {
        match &self.basis {
            Basis::Standard => x.clone(),
            Basis::Fourier(g) => g.forward(x),
            Basis::Unitary(u) => u.ad_mul(x),
        }
    }

    pub fn from_eigen(&self, c: &DVector<C64>) -> DVector<C64> {
        match &self.basis {
            Basis::Standard => c.clone(),
            Basis::Fourier(g) => g.inverse(c),
            Basis::Unitary(u) => u * c,
        }
    }

    /// f(A)x for the normal operator with this spectral data.
    pub fn multiply<F: FnMut(f64) -> C64>(&self, mut f: F, x: &DVector<C64>) -> DVector<C64> {
        let mut c = self.to_eigen(x);
        for (ci, &mu) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= f(mu);
        }
        self.from_eigen(&c)
    }

    pub fn multiply_mat<F: FnMut(f64) -> C64>(&self, mut f: F, x: &DMatrix<C64>) -> DMatrix<C64> {
        let vals: Vec<C64> = self.eigenvalues.iter().map(|&m| f(m)).collect();
        match &self.basis {
            Basis::Standard => {
                let mut y = x.clone();
                for (i, mut row) in y.row_iter_mut().enumerate() {
                    row *= vals[i];
                }
                y
            }
            Basis::Unitary(u) => {
                let mut c = u.ad_mul(x);
                for (i, mut row) in c.row_iter_mut().enumerate() {
                    row *= vals[i];
                }
                u * c
            }
            Basis::Fourier(_) => {
                let mut y = x.clone();
                for j in 0..x.ncols() {
                    let col = self.multiply(&mut f, &x.column(j).into_owned());
                    y.set_column(j, &col);
                }
                y
            }
        }
    }

    pub fn dense_eigenvectors(&self) -> DMatrix<C64> {
        let n = self.eigenvalues.len();
        match &self.basis {
            Basis::Standard => DMatrix::identity(n, n),
            Basis::Unitary(u) => u.clone(),
            Basis::Fourier(g) => {
                let mut m = DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut e = DVector::zeros(n);
                    e[j] = C64::new(1.0, 0.0);
                    m.set_column(j, &g.inverse(&e));
                }
                m
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Action {
    Diagonal(Vec<f64>),
    Fourier { grid: FourierGrid, symbol: Vec<f64> },
    Matrix(DMatrix<C64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonNegativityConstants {
    pub m_a: f64,
    pub l_a: f64,
    pub injective: bool,
    /// Upper bound on the sectoriality angle: exactly 0 for self-adjoint operators,
    /// π − arcsin(1/M_A) otherwise.
    pub sector_angle_bound: f64,
}

/// Singular-value scales of the operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralScale {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Smallest nonzero singular value (equal to `sigma_min` when injective).
    pub smallest_nonzero: f64,
}

#[derive(Debug, Clone)]
pub struct Operator {
    kind: OperatorKind,
    dim: usize,
    action: Action,
    spectral: Option<SpectralData>,
    constants: NonNegativityConstants,
    scale: SpectralScale,
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

impl Operator {
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parse("diagonal needs at least one entry".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NotNonNegative(format!("diagonal entry {v} is not a finite non-negative number")));
        }
        Ok(Self::from_spectral_action(
            OperatorKind::Diagonal,
            Action::Diagonal(values.to_vec()),
            SpectralData { eigenvalues: values.to_vec(), basis: Basis::Standard },
        ))
    }

    pub fn torus_laplacian(grid_size: usize, dims: usize) -> Result<Self> {
        if grid_size < 2 || dims == 0 || dims > 3 {
            return Err(Error::Parse(format!("torus_laplacian needs n >= 2 and 1 <= dims <= 3, got n={grid_size}, dims={dims}")));
        }
        let grid = FourierGrid::new(grid_size, dims);
        let symbol = grid.laplacian_symbol();
        Ok(Self::from_spectral_action(
            OperatorKind::TorusLaplacian { grid_size, dims },
            Action::Fourier { grid: grid.clone(), symbol: symbol.clone() },
            SpectralData { eigenvalues: symbol, basis: Basis::Fourier(grid) },
        ))
    }

    /// Dense operator. Hermitian input is diagonalized and carries spectral data.
    pub fn dense(m: DMatrix<C64>) -> Result<Self> {
        Self::dense_with_kind(m, OperatorKind::DenseMatrix)
    }

    pub fn dense_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("dense matrix must be square and non-empty".into()));
        }
        Self::dense(DMatrix::from_fn(n, n, |i, j| real(rows[i][j])))
    }

    fn dense_with_kind(m: DMatrix<C64>, kind: OperatorKind) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Parse("dense matrix must be square and non-empty".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let asym = (&m - m.adjoint()).norm();
        if asym <= HERMITIAN_TOL * scale {
            let h = (&m + m.adjoint()) * real(0.5);
            let eig = h.clone().symmetric_eigen();
            let top = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            if let Some(bad) = vals.iter().find(|&&v| v < -1e-12 * top.max(1e-300)) {
                return Err(Error::NotNonNegative(format!("Hermitian matrix has negative eigenvalue {bad}")));
            }
            for v in vals.iter_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            let spectral = SpectralData { eigenvalues: vals, basis: Basis::Unitary(eig.eigenvectors) };
            return Ok(Self::from_spectral_action(kind, Action::Matrix(h), spectral));
        }
        Self::from_matrix_action(kind, m)
    }

    fn from_spectral_action(kind: OperatorKind, action: Action, spectral: SpectralData) -> Self {
        let dim = spectral.eigenvalues.len();
        let sigma_max = spectral.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let sigma_min = spectral.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let positive_floor = INJECTIVITY_TOL * sigma_max;
        let smallest_nonzero = spectral.eigenvalues.iter().filter(|&&v| v > positive_floor).fold(f64::INFINITY, |a, &b| a.min(b));
        let scale = SpectralScale {
            sigma_min,
            sigma_max,
            smallest_nonzero: if smallest_nonzero.is_finite() { smallest_nonzero } else { sigma_max },
        };
        let injective = sigma_max > 0.0 && sigma_min > positive_floor;
        let constants =
            NonNegativityConstants { m_a: 1.0, l_a: if sigma_max > 0.0 { 1.0 } else { 0.0 }, injective, sector_angle_bound: 0.0 };
        Operator { kind, dim, action, spectral: Some(spectral), constants, scale }
    }

    fn from_matrix_action(kind: OperatorKind, m: DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        check_eigenvalues_off_negative_axis(&m)?;
        let sv = m.clone().svd(false, false).singular_values;
        let sigma_max = sv.iter().fold(0.0f64, |a, &b| a.max(b));
        let sigma_min = sv.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let floor = INJECTIVITY_TOL * sigma_max;
        let smallest_nonzero = sv.iter().filter(|&&v| v > floor).fold(f64::INFINITY, |a, &b| a.min(b));
        let scale = SpectralScale {
            sigma_min,
            sigma_max,
            smallest_nonzero: if smallest_nonzero.is_finite() { smallest_nonzero } else { sigma_max },
        };
        let mut op = Operator {
            kind,
            dim,
            action: Action::Matrix(m),
            spectral: None,
            constants: NonNegativityConstants {
                m_a: f64::NAN,
                l_a: f64::NAN,
                injective: sigma_max > 0.0 && sigma_min > floor,
                sector_angle_bound: std::f64::consts::PI,
            },
            scale,
        };
        let grid = op.default_lambda_grid();
        let (m_a, l_a) = estimate_nonnegativity_constants(&op, &grid, &NormKind::Euclidean)?;
        op.constants.m_a = m_a;
        op.constants.l_a = l_a;
        op.constants.sector_angle_bound = std::f64::consts::PI - (1.0 / m_a.max(1.0)).asin();
        Ok(op)
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spectral(&self) -> Option<&SpectralData> {
        self.spectral.as_ref()
    }

    pub fn constants(&self) -> NonNegativityConstants {
        self.constants
    }

    pub fn scale(&self) -> SpectralScale {
        self.scale
    }

    pub fn is_injective(&self) -> bool {
        self.constants.injective
    }

    pub fn require_injective(&self) -> Result<()> {
        if self.is_injective() {
            Ok(())
        } else {
            Err(Error::NotInjective { sigma_min: self.scale.sigma_min, sigma_max: self.scale.sigma_max })
        }
    }

    /// Upper bound on the induced norm of f(A) in the `kind` norm given sup |f| over the spectrum.
    /// Exact when the eigenbasis is the standard one or the norm is euclidean; otherwise the
    /// bound picks up the condition number of the eigenvector matrix.
    pub fn multiplier_norm_bound(&self, sup_f: f64, kind: &NormKind) -> Option<f64> {
        let sp = self.spectral.as_ref()?;
        let factor = match (&sp.basis, kind) {
            (Basis::Standard, _) | (_, NormKind::Euclidean) => 1.0,
            _ => {
                let u = sp.dense_eigenvectors();
                induced_norm_upper(&u, kind) * induced_norm_upper(&u.adjoint(), kind)
            }
        };
        Some(sup_f * factor)
    }

    /// Upper bound on ‖A‖ in the `kind` norm.
    pub fn norm_bound(&self, kind: &NormKind) -> f64 {
        match &self.spectral {
            Some(sp) => {
                let m = sp.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
                self.multiplier_norm_bound(m, kind).unwrap_or(f64::INFINITY)
            }
            None => induced_norm_upper(&self.to_matrix(), kind),
        }
    }

    /// Upper bound on ‖A⁻¹‖ in the `kind` norm.
    pub fn inverse_norm_bound(&self, kind: &NormKind) -> Result<f64> {
        self.require_injective()?;
        match &self.spectral {
            Some(sp) => {
                let m = sp.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
                Ok(self.multiplier_norm_bound(1.0 / m, kind).unwrap_or(f64::INFINITY))
            }
            None => {
                let inv = self
                    .to_matrix()
                    .try_inverse()
                    .ok_or(Error::NotInjective { sigma_min: self.scale.sigma_min, sigma_max: self.scale.sigma_max })?;
                Ok(induced_norm_upper(&inv, kind))
            }
        }
    }

    /// 61 log-spaced points over [1e−6, 1e6]·ρ with ρ the largest singular value.
    pub fn default_lambda_grid(&self) -> Vec<f64> {
        let rho = if self.scale.sigma_max > 0.0 { self.scale.sigma_max } else { 1.0 };
        log_grid(1e-6 * rho, 1e6 * rho, 61)
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: n })
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check_dim(x.dim())?;
        Ok(x.like(self.apply_vec(&x.values)))
    }

    pub fn resolvent(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        self.check_dim(x.dim())?;
        Ok(x.like(self.resolvent_vec(lambda, &x.values)?))
    }

    pub fn apply_vec(&self, x: &DVector<C64>) -> DVector<C64> {
        match &self.action {
            Action::Diagonal(d) => DVector::from_iterator(x.len(), x.iter().zip(d).map(|(v, m)| v * m)),
            Action::Fourier { grid, symbol } => {
                let mut c = grid.forward(x);
                for (ci, m) in c.iter_mut().zip(symbol) {
                    *ci *= m;
                }
                grid.inverse(&c)
            }
            Action::Matrix(m) => m * x,
        }
    }

    pub fn apply_mat(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.action {
            Action::Matrix(m) => m * x,
            _ => {
                let mut y = x.clone();
                for j in 0..x.ncols() {
                    y.set_column(j, &self.apply_vec(&x.column(j).into_owned()));
                }
                y
            }
        }
    }

    /// (λ + A)⁻¹x.
    pub fn resolvent_vec(&self, lambda: f64, x: &DVector<C64>) -> Result<DVector<C64>> {
        let xm = DMatrix::from_column_slice(x.len(), 1, x.as_slice());
        let y = self.resolvent_pow_mat(lambda, 1, &xm)?;
        Ok(y.column(0).into_owned())
    }

    /// (λ + A)^{−n}X with a single factorization.
    pub fn resolvent_pow_mat(&self, lambda: f64, n: usize, x: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if !(lambda > 0.0) {
            return Err(Error::Inadmissible(format!("resolvent parameter must be positive, got {lambda}")));
        }
        match &self.action {
            Action::Diagonal(_) | Action::Fourier { .. } => {
                let sp = self.spectral.as_ref().expect("diagonal and torus kinds are spectral");
                Ok(sp.multiply_mat(|m| real((lambda + m).powi(-(n as i32))), x))
            }
            Action::Matrix(m) => {
                let shifted = m + DMatrix::from_diagonal_element(self.dim, self.dim, real(lambda));
                let lu = shifted.lu();
                let mut y = x.clone();
                for _ in 0..n {
                    y = lu.solve(&y).ok_or_else(|| Error::NotNonNegative(format!("λ + A is singular at λ = {lambda}")))?;
                }
                if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::NotNonNegative(format!("λ + A is numerically singular at λ = {lambda}")));
                }
                Ok(y)
            }
        }
    }

    /// [(A + c)(λ + c + A)⁻¹]ⁿX with a single factorization (c ≥ 0 is a shift).
    pub fn shifted_a_resolvent_pow_mat(&self, shift: f64, lambda: f64, n: usize, x: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if !(lambda > 0.0) {
            return Err(Error::Inadmissible(format!("resolvent parameter must be positive, got {lambda}")));
        }
        match &self.action {
            Action::Diagonal(_) | Action::Fourier { .. } => {
                let sp = self.spectral.as_ref().expect("diagonal and torus kinds are spectral");
                Ok(sp.multiply_mat(|m| real(((m + shift) / (lambda + shift + m)).powi(n as i32)), x))
            }
            Action::Matrix(m) => {
                let id = DMatrix::<C64>::identity(self.dim, self.dim);
                let b = m + &id * real(shift);
                let lu = (&b + &id * real(lambda)).lu();
                let mut y = x.clone();
                for _ in 0..n {
                    let s = lu.solve(&y).ok_or_else(|| Error::NotNonNegative(format!("λ + A is singular at λ = {}", lambda + shift)))?;
                    y = &b * s;
                }
                Ok(y)
            }
        }
    }

    /// Dense matrix of the operator in the standard basis.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        match &self.action {
            Action::Matrix(m) => m.clone(),
            Action::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|&v| real(v)))),
            Action::Fourier { .. } => self.apply_mat(&DMatrix::identity(self.dim, self.dim)),
        }
    }

    /// A + ε.
    pub fn shifted(&self, epsilon: f64) -> Result<Operator> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Inadmissible(format!("shift must be a finite non-negative number, got {epsilon}")));
        }
        let kind = OperatorKind::Shifted { base: Box::new(self.kind.clone()), epsilon };
        self.map_spectral(kind, |m| m + epsilon, |a| a + DMatrix::from_diagonal_element(a.nrows(), a.ncols(), real(epsilon)))
    }

    /// A⁻¹, available only for injective operators.
    pub fn inverse(&self) -> Result<Operator> {
        self.require_injective()?;
        let kind = OperatorKind::Inverse { base: Box::new(self.kind.clone()) };
        let dim = self.dim;
        let mut failure = false;
        let op = self.map_spectral(
            kind,
            |m| 1.0 / m,
            |a| {
                a.clone().try_inverse().unwrap_or_else(|| {
                    failure = true;
                    DMatrix::zeros(dim, dim)
                })
            },
        );
        if failure {
            return Err(Error::NotInjective { sigma_min: self.scale.sigma_min, sigma_max: self.scale.sigma_max });
        }
        op
    }

    /// A^α for real α > 0. Spectral handles map eigenvalues; dense non-normal handles are
    /// materialized by the Balakrishnan quadrature.
    pub fn frac_power(&self, exponent: f64, scheme: &QuadratureScheme) -> Result<Operator> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::Inadmissible(format!("operator exponent must be positive, got {exponent}")));
        }
        let kind = OperatorKind::FracPower { base: Box::new(self.kind.clone()), exponent };
        if self.spectral.is_some() {
            return self.map_spectral(kind, |m| if m == 0.0 { 0.0 } else { m.powf(exponent) }, |a| a.clone());
        }
        let m = crate::fractional::power_matrix(self, C64::new(exponent, 0.0), scheme)?;
        Self::dense_with_kind(m, kind)
    }

    fn map_spectral<F, G>(&self, kind: OperatorKind, f: F, g: G) -> Result<Operator>
    where
        F: Fn(f64) -> f64,
        G: FnOnce(&DMatrix<C64>) -> DMatrix<C64>,
    {
        match (&self.action, &self.spectral) {
            (Action::Diagonal(d), _) => {
                let vals: Vec<f64> = d.iter().map(|&m| f(m)).collect();
                let mut op = Operator::diagonal(&vals)?;
                op.kind = kind;
                Ok(op)
            }
            (Action::Fourier { grid, symbol }, _) => {
                let vals: Vec<f64> = symbol.iter().map(|&m| f(m)).collect();
                Ok(Self::from_spectral_action(
                    kind,
                    Action::Fourier { grid: grid.clone(), symbol: vals.clone() },
                    SpectralData { eigenvalues: vals, basis: Basis::Fourier(grid.clone()) },
                ))
            }
            (Action::Matrix(_), Some(sp)) => {
                let vals: Vec<f64> = sp.eigenvalues.iter().map(|&m| f(m)).collect();
                let u = match &sp.basis {
                    Basis::Unitary(u) => u.clone(),
                    _ => unreachable!("dense spectral data uses a unitary basis"),
                };
                let d = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&v| real(v))));
                let m = &u * d * u.adjoint();
                let m = (&m + m.adjoint()) * real(0.5);
                Ok(Self::from_spectral_action(kind, Action::Matrix(m), SpectralData { eigenvalues: vals, basis: Basis::Unitary(u) }))
            }
            (Action::Matrix(m), None) => {
                let mapped = g(m);
                Self::from_matrix_action(kind, mapped)
            }
        }
    }
}

/// Log-spaced grid of `count` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn check_eigenvalues_off_negative_axis(m: &DMatrix<C64>) -> Result<()> {
    let scale = m.norm().max(f64::MIN_POSITIVE);
    if let Some(eigs) = m.clone().schur().eigenvalues() {
        for z in eigs.iter() {
            if z.re < -1e-12 * scale && z.im.abs() <= 1e-9 * scale {
                return Err(Error::NotNonNegative(format!("eigenvalue {z} lies on the negative real axis")));
            }
        }
    }
    Ok(())
}

/// Induced operator norm of `b` for the given vector norm.
pub fn induced_norm(b: &DMatrix<C64>, kind: &NormKind) -> f64 {
    match kind {
        NormKind::Euclidean => spectral_norm(b),
        NormKind::Weighted(w) => {
            let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
            let scaled = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (s[i] / s[j]));
            spectral_norm(&scaled)
        }
        NormKind::PNorm(p) if *p <= 1.0 => {
            (0..b.ncols()).map(|j| crate::vector::p_norm(b.column(j).iter().map(|z| z.norm()), *p)).fold(0.0, f64::max)
        }
        NormKind::PNorm(p) if p.is_infinite() => (0..b.nrows()).map(|i| b.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max),
        NormKind::PNorm(p) => boyd_p_norm(b, *p),
    }
}

/// Upper bound on the induced operator norm of `b`: exact for euclidean, weighted, p ≤ 1 and
/// p = ∞; Riesz–Thorin interpolation between the 1- and ∞-norms for 1 < p < ∞.
pub fn induced_norm_upper(b: &DMatrix<C64>, kind: &NormKind) -> f64 {
    let largest_sv = |m: DMatrix<C64>| m.svd(false, false).singular_values.iter().fold(0.0f64, |a, &v| a.max(v));
    match kind {
        NormKind::Euclidean => largest_sv(b.clone()) * (1.0 + 1e-12),
        NormKind::Weighted(w) => {
            let s: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
            largest_sv(DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * (s[i] / s[j]))) * (1.0 + 1e-12)
        }
        NormKind::PNorm(p) if *p <= 1.0 || p.is_infinite() => induced_norm(b, kind),
        NormKind::PNorm(p) => {
            let one = induced_norm(b, &NormKind::PNorm(1.0));
            let inf = induced_norm(b, &NormKind::PNorm(f64::INFINITY));
            one.powf(1.0 / p) * inf.powf(1.0 - 1.0 / p)
        }
    }
}

/// Largest singular value: power iteration on BᴴB, with an SVD fallback when the
/// iteration has not settled to the tolerance.
pub fn spectral_norm(b: &DMatrix<C64>) -> f64 {
    let n = b.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_fn(n, |i, _| C64::new(1.0 + 0.1 * i as f64, 0.05 * (i % 3) as f64));
    x /= real(x.norm());
    let mut est = 0.0;
    let mut converged = false;
    for _ in 0..POWER_ITERATIONS {
        let y = b * &x;
        let z = b.ad_mul(&y);
        let zn = z.norm();
        if zn == 0.0 {
            converged = est == 0.0;
            break;
        }
        let next = zn.sqrt();
        x = z / real(zn);
        if (next - est).abs() <= POWER_TOL * next {
            est = next;
            converged = true;
            break;
        }
        est = next;
    }
    let est = (b * &x).norm().max(if converged { 0.0 } else { est });
    if converged {
        est
    } else {
        b.clone().svd(false, false).singular_values.iter().fold(0.0f64, |a, &v| a.max(v))
    }
}

fn boyd_p_norm(b: &DMatrix<C64>, p: f64) -> f64 {
    let q = p / (p - 1.0);
    let n = b.ncols();
    let dual = |y: &DVector<C64>, p: f64| -> DVector<C64> {
        let norm = crate::vector::p_norm(y.iter().map(|z| z.norm()), p);
        if norm == 0.0 {
            return DVector::zeros(y.len());
        }
        y.map(|z| {
            let m = z.norm();
            if m == 0.0 {
                real(0.0)
            } else {
                (z / m) * (m / norm).powf(p - 1.0)
            }
        })
    };
    let mut x = DVector::from_element(n, real((n as f64).powf(-1.0 / p)));
    let mut est = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let y = b * &x;
        est = crate::vector::p_norm(y.iter().map(|z| z.norm()), p);
        let z = b.ad_mul(&dual(&y, p));
        let zq = crate::vector::p_norm(z.iter().map(|v| v.norm()), q);
        if zq <= z.dotc(&x).re * (1.0 + POWER_TOL) {
            break;
        }
        x = dual(&z, q);
    }
    // columns give a lower bound that the iteration must not fall under
    let cols = (0..n).map(|j| crate::vector::p_norm(b.column(j).iter().map(|z| z.norm()), p)).fold(0.0, f64::max);
    est.max(cols)
}

/// (M_A, L_A) estimated on `grid`, refined by golden-section search around the grid maxima.
pub fn estimate_nonnegativity_constants(op: &Operator, grid: &[f64], norm: &NormKind) -> Result<(f64, f64)> {
    if grid.len() < 3 {
        return Err(Error::Inadmissible("λ grid needs at least three points".into()));
    }
    norm.validate(op.dim())?;
    let exact_spectral = op.spectral.is_some()
        && (matches!(norm, NormKind::Euclidean) || matches!(op.spectral.as_ref().map(|s| &s.basis), Some(Basis::Standard)));
    if exact_spectral {
        // normal operator in a norm diagonal in its eigenbasis: suprema of scalar profiles
        let c = op.constants();
        return Ok((c.m_a, c.l_a));
    }
    let n = op.dim();
    let ident = DMatrix::<C64>::identity(n, n);
    let profile = |lambda: f64| -> Result<(f64, f64)> {
        let r = op.resolvent_pow_mat(lambda, 1, &ident)?;
        let m = &r * real(lambda);
        let l = &ident - &m;
        Ok((induced_norm(&m, norm), induced_norm(&l, norm)))
    };
    let mut ms = Vec::with_capacity(grid.len());
    let mut ls = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let (m, l) = profile(lambda)?;
        if !m.is_finite() || !l.is_finite() {
            return Err(Error::NotNonNegative(format!("resolvent norm is not finite at λ = {lambda}")));
        }
        ms.push(m);
        ls.push(l);
    }
    for vals in [&ms, &ls] {
        let k = vals.len();
        if vals[0] > vals[1] * (1.0 + 1e-3) && vals[1] > vals[2] * (1.0 + 1e-3) {
            return Err(Error::Divergent { end: "lower" });
        }
        if vals[k - 1] > vals[k - 2] * (1.0 + 1e-3) && vals[k - 2] > vals[k - 3] * (1.0 + 1e-3) {
            return Err(Error::Divergent { end: "upper" });
        }
    }
    let refine = |vals: &[f64], pick: usize| -> f64 {
        let (i, best) = vals.iter().enumerate().fold((0, f64::MIN), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        let lo = grid[i.saturating_sub(1)].ln();
        let hi = grid[(i + 1).min(grid.len() - 1)].ln();
        if hi <= lo {
            return best;
        }
        let (_, neg) = golden_section(
            |u| match profile(u.exp()) {
                Ok(p) => -(if pick == 0 { p.0 } else { p.1 }),
                Err(_) => f64::INFINITY,
            },
            lo,
            hi,
            1e-6,
            80,
        );
        best.max(-neg)
    };
    Ok((refine(&ms, 0), refine(&ls, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_basics() {
        let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
        let y = a.apply(&Vector::from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(y.values[1], real(4.0));
        let r = a.resolvent(1.0, &Vector::from_real(&[1.0, 1.0])).unwrap();
        assert!((r.values[0] - real(0.5)).norm() < 1e-15);
        assert!((r.values[1] - real(0.2)).norm() < 1e-15);
        assert_eq!(a.constants().m_a, 1.0);
        assert_eq!(a.constants().l_a, 1.0);
    }

    #[test]
    fn negative_entries_rejected() {
        assert!(matches!(Operator::diagonal(&[1.0, -1.0]), Err(Error::NotNonNegative(_))));
        assert!(Operator::dense_real(&[vec![-1.0, 5.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn nilpotent_block_is_not_non_negative() {
        let r = Operator::dense_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!(r.is_err(), "{r:?}");
    }

    #[test]
    fn inverse_requires_injective() {
        let a = Operator::diagonal(&[0.0, 1.0]).unwrap();
        assert!(matches!(a.inverse(), Err(Error::NotInjective { .. })));
        let b = Operator::diagonal(&[1.0, 2.0, 4.0]).unwrap().inverse().unwrap();
        assert_eq!(b.spectral().unwrap().eigenvalues, vec![1.0, 0.5, 0.25]);
    }
}
