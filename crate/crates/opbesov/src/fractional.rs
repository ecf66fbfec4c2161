//! Fractional powers, fractional resolvents, semigroups and reproducing formulas.
//!
//! Quadrature routes work on any non-negative handle through shifted-resolvent solves;
//! the spectral route multiplies eigen-coefficients and serves as the oracle.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gamma::{gamma, gamma_ratio, rgamma};
use crate::operator::{Operator, C64};
use crate::quadrature::{integrate_above, integrate_log, LogIntegrand, QuadOutput, QuadratureScheme};
use crate::vector::Vector;

fn c(re: f64) -> C64 {
    Complex64::new(re, 0.0)
}

/// Smallest integer strictly greater than Re z (for Re z ≥ 0).
pub fn witness_n(z: C64) -> usize {
    (z.re.floor() + 1.0).max(1.0) as usize
}

fn is_nonneg_integer(z: C64) -> Option<usize> {
    if z.im == 0.0 && z.re >= 0.0 && z.re == z.re.round() && z.re < 1e6 {
        Some(z.re as usize)
    } else {
        None
    }
}

/// λ^z on λ > 0, principal branch.
pub fn cpow(lambda: f64, z: C64) -> C64 {
    if z == c(0.0) {
        return c(1.0);
    }
    (z * lambda.ln()).exp()
}

/// μ^z for μ ≥ 0 with 0^z := 0 (Re z > 0) and 0^0 := 1.
fn spectral_pow(mu: f64, z: C64) -> Result<C64> {
    if mu > 0.0 {
        Ok(cpow(mu, z))
    } else if z == c(0.0) {
        Ok(c(1.0))
    } else if z.re > 0.0 {
        Ok(c(0.0))
    } else {
        Err(Error::NotInjective { sigma_min: 0.0, sigma_max: f64::NAN })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: Vector,
    /// Declared quadrature tail bound (0 for exact routes).
    pub tail_bound: f64,
    /// Quadrature nodes used (0 for exact routes).
    pub nodes: usize,
}

impl Evaluation {
    fn exact(value: Vector) -> Self {
        Evaluation { value, tail_bound: 0.0, nodes: 0 }
    }
}

fn column(x: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_column_slice(x.len(), 1, x.as_slice())
}

fn check_dim(a: &Operator, x: &Vector) -> Result<()> {
    if a.dim() == x.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a.dim(), got: x.dim() })
    }
}

fn scale_shape(a: &Operator, decay_lo: f64, decay_hi: f64) -> LogIntegrand {
    let s = a.scale();
    let hi = if s.sigma_max > 0.0 { s.sigma_max } else { 1.0 };
    let lo = if s.smallest_nonzero > 0.0 { s.smallest_nonzero } else { hi };
    LogIntegrand { lo_scale: lo, hi_scale: hi, decay_lo, decay_hi }
}

fn scaled(out: QuadOutput<DMatrix<C64>>, k: C64) -> QuadOutput<DMatrix<C64>> {
    QuadOutput { value: out.value * k, tail_bound: out.tail_bound * k.norm(), ..out }
}

/// The λ → 0 limit P X of Aⁿ(λ+A)^{−n}X (the identity when A is injective, the projection onto
/// the nonzero eigenspaces for spectral handles) with the smallest scale at which it takes over.
fn range_limit(a: &Operator, x: &DMatrix<C64>) -> Option<(DMatrix<C64>, f64)> {
    if a.is_injective() {
        return Some((x.clone(), a.scale().smallest_nonzero));
    }
    let sp = a.spectral()?;
    let lo = sp.eigenvalues.iter().copied().filter(|m| *m > 0.0).fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return None;
    }
    Some((sp.multiply_mat(|m| c(if m > 0.0 { 1.0 } else { 0.0 }), x), lo))
}

/// Balakrishnan integral Γ(n)/(Γ(α)Γ(n−α)) ∫ λ^α [A(λ+A)⁻¹]ⁿ X dλ/λ, 0 < Re α, α ∉ ℕ.
///
/// The integrand behaves like λ^α PX at 0 and λ^{α−n}AⁿX at ∞. Both asymptotes are subtracted
/// through λ^α (c/(λ+c))^{n+1} PX and λ^{α+n}(λ+C)^{−2n} AⁿX, whose integrals are Beta functions,
/// so the remainder decays one power faster at each end. Without this, Re α near 0 or near n would
/// need truncation points outside the range of f64.
fn balakrishnan_mat(a: &Operator, alpha: C64, x: &DMatrix<C64>, scheme: &QuadratureScheme) -> Result<QuadOutput<DMatrix<C64>>> {
    let n = witness_n(alpha);
    let nf = n as f64;
    let pref = gamma_ratio(&[c(nf)], &[alpha, c(nf) - alpha]);
    let mut shape = scale_shape(a, alpha.re, nf - alpha.re + 1.0);
    let big = shape.hi_scale;
    let anx = integer_power_mat(a, n, x);
    let range = range_limit(a, x);
    if let Some((_, lo)) = &range {
        shape.lo_scale = shape.lo_scale.min(*lo);
        shape.decay_lo += 1.0;
    }
    let mut err = None;
    let out = integrate_log(scheme, shape, |lambda| match a.shifted_a_resolvent_pow_mat(0.0, lambda, n, x) {
        Ok(mut y) => {
            y -= &anx * c((lambda / (lambda + big) / (lambda + big)).powi(n as i32));
            if let Some((px, lo)) = &range {
                y -= px * c((lo / (lambda + lo)).powi(n as i32 + 1));
            }
            y * cpow(lambda, alpha)
        }
        Err(e) => {
            err.get_or_insert(e);
            DMatrix::from_element(x.nrows(), x.ncols(), c(f64::NAN))
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut out = scaled(out?, pref);
    // pref·∫ λ^{α+n}(λ+C)^{−2n} dλ/λ = C^{α−n} Γ(n)Γ(α+n)/(Γ(α)Γ(2n))
    out.value += anx * (cpow(big, alpha - nf) * gamma_ratio(&[c(nf), alpha + nf], &[alpha, c(2.0 * nf)]));
    // pref·∫ λ^α (c/(λ+c))^{n+1} dλ/λ = c^α (n−α)/n
    if let Some((px, lo)) = range {
        out.value += px * (cpow(lo, alpha) * (c(nf) - alpha) / nf);
    }
    Ok(out)
}

/// A^{−α}X = Γ(n)/(Γ(α)Γ(n−α)) ∫ λ^{−α} [λ(λ+A)⁻¹]ⁿ X dλ/λ for injective A, Re α > 0.
///
/// The λ → ∞ asymptote λ^{−α}X is removed through λ^{−α}(λ/(λ+C))^{n+1}X, whose integral is
/// C^{−α}B(α, n+1−α).
fn negative_balakrishnan_mat(a: &Operator, alpha: C64, x: &DMatrix<C64>, scheme: &QuadratureScheme) -> Result<QuadOutput<DMatrix<C64>>> {
    a.require_injective()?;
    let n = witness_n(alpha);
    let nf = n as f64;
    let pref = gamma_ratio(&[c(nf)], &[alpha, c(nf) - alpha]);
    let shape = scale_shape(a, nf - alpha.re, alpha.re + 1.0);
    let big = shape.hi_scale;
    let mut err = None;
    let out = integrate_log(scheme, shape, |lambda| match a.resolvent_pow_mat(lambda, n, x) {
        Ok(y) => {
            let y = y * c(lambda.powi(n as i32)) - x * c((lambda / (lambda + big)).powi(n as i32 + 1));
            y * cpow(lambda, -alpha)
        }
        Err(e) => {
            err.get_or_insert(e);
            DMatrix::from_element(x.nrows(), x.ncols(), c(f64::NAN))
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut out = scaled(out?, pref);
    out.value += x * (cpow(big, -alpha) * (c(nf) - alpha) / nf);
    Ok(out)
}

fn integer_power_mat(a: &Operator, k: usize, x: &DMatrix<C64>) -> DMatrix<C64> {
    let mut y = x.clone();
    for _ in 0..k {
        y = a.apply_mat(&y);
    }
    y
}

/// A^z X by the spectral route when available, otherwise by quadrature.
pub(crate) fn power_mat(a: &Operator, z: C64, x: &DMatrix<C64>, scheme: &QuadratureScheme) -> Result<DMatrix<C64>> {
    if z == c(0.0) {
        return Ok(x.clone());
    }
    if let Some(sp) = a.spectral() {
        let mut failed = false;
        let y = sp.multiply_mat(
            |m| {
                spectral_pow(m, z).unwrap_or_else(|_| {
                    failed = true;
                    c(0.0)
                })
            },
            x,
        );
        return if failed { Err(a.require_injective().unwrap_err()) } else { Ok(y) };
    }
    if let Some(k) = is_nonneg_integer(z) {
        return Ok(integer_power_mat(a, k, x));
    }
    if z.re > 0.0 {
        if z.re == z.re.round() {
            return Err(Error::Unsupported(format!("quadrature for A^z with integer Re z and Im z != 0 (z = {z})")));
        }
        return Ok(balakrishnan_mat(a, z, x, scheme)?.value);
    }
    if z.re < 0.0 {
        if z.re == z.re.round() && z.im == 0.0 {
            let inv = a.inverse()?;
            return Ok(integer_power_mat(&inv, (-z.re) as usize, x));
        }
        if z.re == z.re.round() {
            return Err(Error::Unsupported(format!("quadrature for A^z with integer Re z and Im z != 0 (z = {z})")));
        }
        return Ok(negative_balakrishnan_mat(a, -z, x, scheme)?.value);
    }
    Err(Error::Unsupported(format!("imaginary power A^{z} needs spectral data")))
}

/// Dense matrix of A^z.
pub fn power_matrix(a: &Operator, z: C64, scheme: &QuadratureScheme) -> Result<DMatrix<C64>> {
    power_mat(a, z, &DMatrix::identity(a.dim(), a.dim()), scheme)
}

/// (λ + A)^{−γ}X.
pub(crate) fn resolvent_power_mat(
    a: &Operator,
    lambda: f64,
    gamma_exp: C64,
    x: &DMatrix<C64>,
    scheme: &QuadratureScheme,
) -> Result<DMatrix<C64>> {
    if let Some(sp) = a.spectral() {
        return Ok(sp.multiply_mat(|m| cpow(lambda + m, -gamma_exp), x));
    }
    if gamma_exp == c(0.0) {
        return Ok(x.clone());
    }
    if let Some(k) = is_nonneg_integer(gamma_exp) {
        return a.resolvent_pow_mat(lambda, k, x);
    }
    // (λ+A)^{−γ} = (λ+A)^{−m}(λ+A)^{δ}, δ = m − γ with 0 < Re δ ≤ 1
    let mut m = gamma_exp.re.ceil() as i64;
    let mut delta = c(m as f64) - gamma_exp;
    if delta.re <= 0.0 {
        m += 1;
        delta += 1.0;
    }
    let n = witness_n(delta);
    let pref = gamma_ratio(&[c(n as f64)], &[delta, c(n as f64) - delta]);
    let s = a.scale();
    let shape = LogIntegrand {
        lo_scale: 0.5 * lambda,
        hi_scale: lambda + s.sigma_max.max(lambda),
        decay_lo: delta.re,
        decay_hi: n as f64 - delta.re,
    };
    let inner = scheme.inner();
    let mut err = None;
    let out = integrate_log(&inner, shape, |mu| match a.shifted_a_resolvent_pow_mat(lambda, mu, n, x) {
        Ok(y) => y * cpow(mu, delta),
        Err(e) => {
            err.get_or_insert(e);
            DMatrix::from_element(x.nrows(), x.ncols(), c(f64::NAN))
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let y = out?.value * pref;
    if m >= 0 {
        a.resolvent_pow_mat(lambda, m as usize, &y)
    } else {
        let shifted = a.shifted(lambda)?;
        Ok(integer_power_mat(&shifted, (-m) as usize, &y))
    }
}

/// A^β(λ+A)^{−α−β}X, the building block of every dyadic quasi-norm.
pub(crate) fn block_mat(
    a: &Operator,
    lambda: f64,
    alpha: C64,
    beta: C64,
    x: &DMatrix<C64>,
    beta_power: Option<&DMatrix<C64>>,
    scheme: &QuadratureScheme,
) -> Result<DMatrix<C64>> {
    if let Some(sp) = a.spectral() {
        let mut failed = false;
        let y = sp.multiply_mat(
            |m| match spectral_pow(m, beta) {
                Ok(p) => p * cpow(lambda + m, -(alpha + beta)),
                Err(_) => {
                    failed = true;
                    c(0.0)
                }
            },
            x,
        );
        return if failed { Err(a.require_injective().unwrap_err()) } else { Ok(y) };
    }
    if let (Some(kb), Some(kab)) = (is_nonneg_integer(beta), is_nonneg_integer(alpha + beta)) {
        if kab >= kb {
            let y = a.resolvent_pow_mat(lambda, kab - kb, x)?;
            return a.shifted_a_resolvent_pow_mat(0.0, lambda, kb, &y);
        }
    }
    let y = resolvent_power_mat(a, lambda, alpha + beta, x, scheme)?;
    match beta_power {
        Some(p) => Ok(p * y),
        None => power_mat(a, beta, &y, scheme),
    }
}

/// Vector form of [`block_mat`].
pub fn block(a: &Operator, lambda: f64, alpha: C64, beta: C64, x: &Vector, scheme: &QuadratureScheme) -> Result<Vector> {
    check_dim(a, x)?;
    let y = block_mat(a, lambda, alpha, beta, &column(&x.values), None, scheme)?;
    Ok(x.like(y.column(0).into_owned()))
}

/// A^α x by the Balakrishnan integral (repeated application when α ∈ ℕ).
pub fn frac_power(a: &Operator, alpha: C64, x: &Vector, scheme: &QuadratureScheme) -> Result<Evaluation> {
    check_dim(a, x)?;
    if !(alpha.re > 0.0) {
        return Err(Error::Inadmissible(format!("frac_power needs Re α > 0, got {alpha}")));
    }
    if let Some(k) = is_nonneg_integer(alpha) {
        return Ok(Evaluation::exact(x.like(integer_power_mat(a, k, &column(&x.values)).column(0).into_owned())));
    }
    if alpha.re == alpha.re.round() {
        return Err(Error::Unsupported(format!(
            "the integral representation is not available for integer Re α with Im α != 0 (α = {alpha}); use the spectral route"
        )));
    }
    let out = balakrishnan_mat(a, alpha, &column(&x.values), scheme)?;
    Ok(Evaluation { value: x.like(out.value.column(0).into_owned()), tail_bound: out.tail_bound, nodes: out.nodes })
}

/// A^z x = Γ(α+β)/(Γ(α+z)Γ(β−z)) ∫ λ^{z+α} A^β(λ+A)^{−α−β} x dλ/λ, −Re α < Re z < Re β.
pub fn frac_power_unified(a: &Operator, z: C64, alpha: C64, beta: C64, x: &Vector, scheme: &QuadratureScheme) -> Result<Evaluation> {
    check_dim(a, x)?;
    if alpha.re < 0.0 || beta.re < 0.0 {
        return Err(Error::Inadmissible(format!("need Re α ≥ 0 and Re β ≥ 0, got α = {alpha}, β = {beta}")));
    }
    if !(-alpha.re < z.re && z.re < beta.re) {
        return Err(Error::Inadmissible(format!("need −Re α < Re z < Re β, got z = {z}, α = {alpha}, β = {beta}")));
    }
    if z.re <= 0.0 {
        a.require_injective()?;
    }
    let pref = gamma(alpha + beta) * rgamma(alpha + z) * rgamma(beta - z);
    let xm = column(&x.values);
    let beta_power = if a.spectral().is_none() && is_nonneg_integer(beta).is_none() { Some(power_matrix(a, beta, scheme)?) } else { None };
    // λ^{z−β}A^βx at ∞ is removed through λ^{z+α}(λ+C)^{−α−β}A^βx, whose weighted integral is C^{z−β}A^βx
    let abx = match &beta_power {
        Some(m) => m * &xm,
        None => power_mat(a, beta, &xm, scheme)?,
    };
    let shape = scale_shape(a, (z + alpha).re, (beta - z).re + 1.0);
    let big = shape.hi_scale;
    let mut err = None;
    let out = integrate_log(scheme, shape, |lambda| match block_mat(a, lambda, alpha, beta, &xm, beta_power.as_ref(), scheme) {
        Ok(y) => (y - &abx * cpow(lambda + big, -(alpha + beta))) * cpow(lambda, z + alpha),
        Err(e) => {
            err.get_or_insert(e);
            DMatrix::from_element(xm.nrows(), 1, c(f64::NAN))
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let out = out?;
    let value = out.value * pref + abx * cpow(big, z - beta);
    Ok(Evaluation { value: x.like(value.column(0).into_owned()), tail_bound: out.tail_bound * pref.norm(), nodes: out.nodes })
}

/// A^z x by eigen-multipliers μ^z (0^z := 0 for Re z > 0).
pub fn spectral_frac_power(a: &Operator, z: C64, x: &Vector) -> Result<Vector> {
    check_dim(a, x)?;
    let sp = a.spectral().ok_or(Error::NoSpectralData)?;
    if z.re <= 0.0 && z != c(0.0) {
        a.require_injective()?;
    }
    let mut failed = false;
    let y = sp.multiply(
        |m| {
            spectral_pow(m, z).unwrap_or_else(|_| {
                failed = true;
                c(0.0)
            })
        },
        &x.values,
    );
    if failed {
        return Err(a.require_injective().unwrap_err());
    }
    Ok(x.like(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracResolventVariant {
    /// (λ + A^α)⁻¹
    Resolvent,
    /// A^α(λ + A^α)⁻¹
    Complement,
}

/// (λ + A^α)⁻¹x or A^α(λ + A^α)⁻¹x by the resolvent kernel, 0 < α < 1.
pub fn frac_resolvent(
    a: &Operator,
    alpha: f64,
    lambda: f64,
    x: &Vector,
    scheme: &QuadratureScheme,
    variant: FracResolventVariant,
) -> Result<Evaluation> {
    check_dim(a, x)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Inadmissible(format!("fractional resolvent needs 0 < α < 1, got {alpha}")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Inadmissible(format!("λ must be positive, got {lambda}")));
    }
    let pref = (PI * alpha).sin() / PI;
    let cosa = (PI * alpha).cos();
    let s = a.scale();
    let peak = lambda.powf(1.0 / alpha);
    let hi = if s.sigma_max > 0.0 { s.sigma_max } else { 1.0 };
    let lo = if s.smallest_nonzero > 0.0 { s.smallest_nonzero } else { hi };
    let shape = LogIntegrand { lo_scale: lo.min(peak), hi_scale: hi.max(peak), decay_lo: alpha, decay_hi: alpha };
    let xm = column(&x.values);
    let mut err = None;
    let out = integrate_log(scheme, shape, |mu| {
        let ma = mu.powf(alpha);
        let den = lambda * lambda + 2.0 * lambda * ma * cosa + ma * ma;
        let r = match variant {
            FracResolventVariant::Resolvent => a.resolvent_pow_mat(mu, 1, &xm).map(|y| y * c(mu * ma / den)),
            FracResolventVariant::Complement => a.shifted_a_resolvent_pow_mat(0.0, mu, 1, &xm).map(|y| y * c(lambda * ma / den)),
        };
        r.unwrap_or_else(|e| {
            err.get_or_insert(e);
            DMatrix::from_element(xm.nrows(), 1, c(f64::NAN))
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    let out = out?;
    Ok(Evaluation { value: x.like((out.value * c(pref)).column(0).into_owned()), tail_bound: out.tail_bound * pref, nodes: out.nodes })
}

/// Γ(n)/(Γ(α)Γ(n−α)) ∫ λ^α(1+λ)^{−n} dλ/λ, which equals 1.
pub fn euler_integral(alpha: f64, n: usize, scheme: &QuadratureScheme) -> Result<f64> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::Inadmissible(format!("need 0 < α < n, got α = {alpha}, n = {n}")));
    }
    let pref = gamma_ratio(&[c(n as f64)], &[c(alpha), c(n as f64 - alpha)]).re;
    let shape = LogIntegrand { lo_scale: 1.0, hi_scale: 1.0, decay_lo: alpha, decay_hi: n as f64 - alpha };
    let out = integrate_log(scheme, shape, |l: f64| l.powf(alpha) * (1.0 + l).powi(-(n as i32)))?;
    Ok(pref * out.value)
}

/// (1/(Γ(α)Γ(1−α))) ∫ λμ^α/(λ² + 2λμ^α cos πα + μ^{2α}) dμ/μ, which equals 1.
pub fn resolvent_scalar_integral(alpha: f64, lambda: f64, scheme: &QuadratureScheme) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0 && lambda > 0.0) {
        return Err(Error::Inadmissible(format!("need 0 < α < 1 and λ > 0, got α = {alpha}, λ = {lambda}")));
    }
    let pref = (rgamma(c(alpha)) * rgamma(c(1.0 - alpha))).re;
    let cosa = (PI * alpha).cos();
    let peak = lambda.powf(1.0 / alpha);
    let shape = LogIntegrand { lo_scale: peak, hi_scale: peak, decay_lo: alpha, decay_hi: alpha };
    let out = integrate_log(scheme, shape, |mu: f64| {
        let ma = mu.powf(alpha);
        lambda * ma / (lambda * lambda + 2.0 * lambda * ma * cosa + ma * ma)
    })?;
    Ok(pref * out.value)
}

/// e^{−tA}x by eigen-multipliers.
pub fn semigroup_apply(a: &Operator, t: f64, x: &Vector) -> Result<Vector> {
    check_dim(a, x)?;
    if !(t >= 0.0) {
        return Err(Error::Inadmissible(format!("semigroup time must be non-negative, got {t}")));
    }
    let sp = a.spectral().ok_or_else(|| {
        Error::SemigroupUnavailable("operator has no eigendecomposition and the matrix exponential fallback is disabled".into())
    })?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    Ok(x.like(sp.multiply(|m| c((-t * m).exp()), &x.values)))
}

/// A^α x = (1/Γ(β−α)) ∫ t^{−α}(tA)^β T(t)x dt/t, with T(t) = e^{−tA}, Re β > Re α > 0.
pub fn frac_power_via_semigroup(a: &Operator, alpha: C64, beta: C64, x: &Vector, scheme: &QuadratureScheme) -> Result<Evaluation> {
    check_dim(a, x)?;
    if alpha == c(0.0) {
        return Ok(Evaluation::exact(x.clone()));
    }
    if !(alpha.re > 0.0) || !(beta.re > alpha.re) {
        return Err(Error::Inadmissible(format!("need Re β > Re α > 0, got α = {alpha}, β = {beta}")));
    }
    let sp = a.spectral().ok_or_else(|| Error::SemigroupUnavailable("operator has no spectral data".into()))?;
    let coeffs = sp.to_eigen(&x.values);
    let s = a.scale();
    let hi = if s.sigma_max > 0.0 { s.sigma_max } else { 1.0 };
    let lo = if s.smallest_nonzero > 0.0 { s.smallest_nonzero } else { hi };
    // t^{β−α}A^βx at 0 is removed through t^{β−α}e^{−tC}A^βx, whose weighted integral is C^{α−β}A^βx
    let shape = LogIntegrand { lo_scale: 1.0 / hi, hi_scale: 1.0 / lo, decay_lo: (beta - alpha).re + 1.0, decay_hi: f64::INFINITY };
    let eig = &sp.eigenvalues;
    let out = integrate_log(scheme, shape, |t| {
        let w = cpow(t, -alpha);
        DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(eig).map(|(ci, &m)| {
                if m == 0.0 {
                    c(0.0)
                } else {
                    ci * w * cpow(t * m, beta) * (-(-t * m).exp() * (-t * (hi - m)).exp_m1())
                }
            }),
        )
    })?;
    let pref = rgamma(beta - alpha);
    let asymptote = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig).map(|(ci, &m)| if m == 0.0 { c(0.0) } else { ci * cpow(m, beta) * cpow(hi, alpha - beta) }),
    );
    Ok(Evaluation {
        value: x.like(sp.from_eigen(&(out.value * pref + asymptote))),
        tail_bound: out.tail_bound * pref.norm(),
        nodes: out.nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubordinationMode {
    /// e^{−tμ^α} per eigenvalue.
    Spectral,
    /// ∫ k_α(t, s) T(s)x ds with the kernel evaluated by a rotated contour integral.
    Kernel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubordinatedOutput {
    pub value: Vector,
    /// |∫ k_α(t, s) ds − 1| for the kernel route, 0 for the spectral route.
    pub mass_residual: f64,
}

/// Subordination kernel k_α(t, s) = (1/π) ∫₀^∞ e^{−sr − t r^α cos πα} sin(t r^α sin πα) dr,
/// the density in s of the subordinator at time t.
pub fn subordination_kernel(alpha: f64, t: f64, s: f64, scheme: &QuadratureScheme) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(t > 0.0) || !(s > 0.0) {
        return Err(Error::Inadmissible(format!("kernel needs 0 < α < 1, t > 0, s > 0 (α = {alpha}, t = {t}, s = {s})")));
    }
    let x = t * s.powf(-alpha);
    if x <= 0.5 {
        // Im(I) is a tiny fraction of Re(I) ≈ 1/s here, so expand exp(−t r^α e^{−iπα}) instead:
        // k = (1/π) Σ_{n≥1} (−1)^{n+1} xⁿ Γ(nα+1)/n! sin(πnα) / s
        let mut sum = 0.0;
        let mut log_xn_over_fact = 0.0;
        for n in 1..400 {
            let nf = n as f64;
            log_xn_over_fact += x.ln() - nf.ln();
            let mag = (log_xn_over_fact + crate::gamma::ln_gamma_real(nf * alpha + 1.0)).exp();
            let term = if n % 2 == 1 { mag } else { -mag } * (PI * nf * alpha).sin();
            sum += term;
            if mag < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok(sum / (PI * s));
    }
    // I = ∫₀^∞ exp(−sr − t r^α e^{−iπα}) dr and k = Im(I)/π. Rotating r = ρe^{iφ} keeps both
    // exponents decaying when φ lies between π − π/(2α) and π/2.
    let phi_lo = (PI - PI / (2.0 * alpha)).max(0.0);
    let phi = 0.5 * (phi_lo + 0.5 * PI);
    let rot = C64::from_polar(1.0, phi);
    let tail_rot = C64::from_polar(1.0, alpha * (phi - PI));
    let r1 = 1.0 / s;
    let r2 = t.powf(-1.0 / alpha);
    let shape = LogIntegrand { lo_scale: r1.min(r2), hi_scale: r1.max(r2), decay_lo: 1.0, decay_hi: f64::INFINITY };
    let inner = QuadratureScheme { tail_tolerance: 1e-13, ..scheme.inner() };
    let out = integrate_log(&inner, shape, |rho| {
        let e = -rot * (s * rho) - tail_rot * (t * rho.powf(alpha));
        rot * e.exp() * rho
    });
    let out = match out {
        Ok(o) => o,
        // the integral itself can be far below the tail floor for tiny s; bound it directly
        Err(crate::quadrature::QuadError::TailNotCertified { value, .. }) if value < 1e-300 => return Ok(0.0),
        Err(e) => return Err(e.into()),
    };
    Ok(out.value.im / PI)
}

/// T_α(t)x for the semigroup generated by −A^α.
pub fn subordinated_semigroup(
    a: &Operator,
    alpha: f64,
    t: f64,
    x: &Vector,
    scheme: &QuadratureScheme,
    mode: SubordinationMode,
) -> Result<SubordinatedOutput> {
    check_dim(a, x)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Inadmissible(format!("subordination needs 0 < α < 1, got {alpha}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Inadmissible(format!("time must be non-negative, got {t}")));
    }
    let sp = a.spectral().ok_or_else(|| Error::SemigroupUnavailable("operator has no spectral data".into()))?;
    if t == 0.0 {
        return Ok(SubordinatedOutput { value: x.clone(), mass_residual: 0.0 });
    }
    match mode {
        SubordinationMode::Spectral => {
            Ok(SubordinatedOutput { value: x.like(sp.multiply(|m| c((-t * m.powf(alpha)).exp()), &x.values)), mass_residual: 0.0 })
        }
        SubordinationMode::Kernel => {
            let coeffs = sp.to_eigen(&x.values);
            let eig = &sp.eigenvalues;
            let n = eig.len();
            let center = t.powf(1.0 / alpha);
            let shape = LogIntegrand { lo_scale: center, hi_scale: center, decay_lo: f64::INFINITY, decay_hi: alpha };
            let mut err = None;
            // last component carries the kernel mass
            let out = integrate_log(scheme, shape, |s| {
                let k = match subordination_kernel(alpha, t, s, scheme) {
                    Ok(k) => k,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::NAN
                    }
                };
                let mut v = DVector::zeros(n + 1);
                for i in 0..n {
                    v[i] = coeffs[i] * (k * s * (-s * eig[i]).exp());
                }
                v[n] = c(k * s);
                v
            });
            if let Some(e) = err {
                return Err(e);
            }
            let out = out?;
            let mass = out.value[n].re;
            let residual = (mass - 1.0).abs();
            if !(residual <= 1e-6) {
                return Err(Error::NotConvergent(format!("subordination kernel mass residual {residual:e}")));
            }
            let y = out.value.rows(0, n).into_owned();
            Ok(SubordinatedOutput { value: x.like(sp.from_eigen(&y)), mass_residual: residual })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicLimits {
    /// lim_{t→∞} t^α(t+A)^{−α}x
    pub limit_at_infinity: Vector,
    /// lim_{t→∞} A^α(t+A)^{−α}x
    pub range_limit_at_infinity: Vector,
    /// lim_{t→0} t^α(t+A)^{−α}x, the kernel component
    pub limit_at_zero: Vector,
    /// lim_{t→0} A^α(t+A)^{−α}x, the range component
    pub range_limit_at_zero: Vector,
    /// Discrepancy between successive extrapolants, per limit, in the order above.
    pub residuals: [f64; 4],
    pub converged: bool,
}

/// Richardson extrapolation of v(t) = L + c·t^r from two samples.
fn extrapolate(t1: f64, v1: &DVector<C64>, t2: f64, v2: &DVector<C64>, r: C64) -> DVector<C64> {
    let rho = cpow(t1 / t2, r);
    (v1 - v2 * rho) / (c(1.0) - rho)
}

/// Limits of t^α(t+A)^{−α}x and A^α(t+A)^{−α}x at both ends of `t_grid`.
pub fn ergodic_limits(a: &Operator, alpha: C64, x: &Vector, t_grid: &[f64], scheme: &QuadratureScheme) -> Result<ErgodicLimits> {
    check_dim(a, x)?;
    if !(alpha.re > 0.0) {
        return Err(Error::Inadmissible(format!("need Re α > 0, got {alpha}")));
    }
    if t_grid.len() < 3 {
        return Err(Error::Inadmissible("t grid needs at least three points".into()));
    }
    let mut ts = t_grid.to_vec();
    ts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let xm = column(&x.values);
    let p =
        |t: f64| -> Result<DVector<C64>> { Ok(block_mat(a, t, alpha, c(0.0), &xm, None, scheme)?.column(0).into_owned() * cpow(t, alpha)) };
    let q = |t: f64| -> Result<DVector<C64>> { Ok(block_mat(a, t, c(0.0), alpha, &xm, None, scheme)?.column(0).into_owned()) };
    let k = ts.len();
    let (t0, t1, t2) = (ts[0], ts[1], ts[2]);
    let (u0, u1, u2) = (ts[k - 1], ts[k - 2], ts[k - 3]);
    let scale = x.norm().max(f64::MIN_POSITIVE);
    let mut residuals = [0.0; 4];
    // at infinity: P − L ~ t^{−1}, Q ~ t^{−α}; at zero: P − L ~ t^{α}, Q − L ~ t
    let pairs: [(&dyn Fn(f64) -> Result<DVector<C64>>, [f64; 3], C64); 4] =
        [(&p, [u0, u1, u2], c(-1.0)), (&q, [u0, u1, u2], -alpha), (&p, [t0, t1, t2], alpha), (&q, [t0, t1, t2], c(1.0))];
    let mut limits = Vec::with_capacity(4);
    for (i, (f, pts, rate)) in pairs.iter().enumerate() {
        let v0 = f(pts[0])?;
        let v1 = f(pts[1])?;
        let v2 = f(pts[2])?;
        let best = extrapolate(pts[0], &v0, pts[1], &v1, *rate);
        let prev = extrapolate(pts[1], &v1, pts[2], &v2, *rate);
        residuals[i] = x.norm_kind.norm(&(&best - &prev)) / scale;
        limits.push(x.like(best));
    }
    let converged = residuals.iter().all(|r| *r <= 1e-6);
    let mut it = limits.into_iter();
    Ok(ErgodicLimits {
        limit_at_infinity: it.next().unwrap(),
        range_limit_at_infinity: it.next().unwrap(),
        limit_at_zero: it.next().unwrap(),
        range_limit_at_zero: it.next().unwrap(),
        residuals,
        converged,
    })
}

/// Relative residual ‖x − RHS‖/‖x‖ of the inhomogeneous reproducing formula
///
/// ```text
/// x = Γ(α+m)/(Γ(α)Γ(m)) ∫_{λ}^∞ t^α A^m(t+A)^{−α−m}x dt/t
///   + Σ_{k<m} Γ(α+k)/(Γ(α)k!) [A(λ+A)⁻¹]^k λ^α(λ+A)^{−α}x.
/// ```
///
/// With `lambda_cut = 0` the homogeneous formula (integral over (0, ∞), no sum) is used.
pub fn reproducing_residual(a: &Operator, alpha: C64, m: usize, lambda_cut: f64, x: &Vector, scheme: &QuadratureScheme) -> Result<f64> {
    check_dim(a, x)?;
    if !(alpha.re > 0.0) || m == 0 {
        return Err(Error::Inadmissible(format!("need Re α > 0 and m ≥ 1, got α = {alpha}, m = {m}")));
    }
    if !(lambda_cut >= 0.0) {
        return Err(Error::Inadmissible(format!("cut must be non-negative, got {lambda_cut}")));
    }
    let xm = column(&x.values);
    let mc = c(m as f64);
    let pref = gamma(alpha + mc) * rgamma(alpha) * rgamma(mc);
    let mut err = None;
    let integrand = |t: f64| match block_mat(a, t, alpha, mc, &xm, None, scheme) {
        Ok(y) => y * cpow(t, alpha),
        Err(e) => {
            err.get_or_insert(e);
            DMatrix::from_element(xm.nrows(), 1, c(f64::NAN))
        }
    };
    let mut rhs = if lambda_cut == 0.0 {
        a.require_injective()?;
        let shape = scale_shape(a, alpha.re, m as f64);
        integrate_log(scheme, shape, integrand)?.value * pref
    } else {
        let hi = a.scale().sigma_max.max(lambda_cut);
        integrate_above(scheme, lambda_cut, hi, m as f64, integrand)?.value * pref
    };
    if let Some(e) = err {
        return Err(e);
    }
    if lambda_cut > 0.0 {
        let base = block_mat(a, lambda_cut, alpha, c(0.0), &xm, None, scheme)? * cpow(lambda_cut, alpha);
        let mut term = base;
        for k in 0..m {
            let coef = gamma(alpha + k as f64) * rgamma(alpha) * rgamma(c(k as f64 + 1.0));
            rhs += &term * coef;
            term = a.shifted_a_resolvent_pow_mat(0.0, lambda_cut, 1, &term)?;
        }
    }
    let diff = &xm - rhs;
    let nx = x.norm();
    if nx == 0.0 {
        return Ok(x.norm_kind.norm(&diff.column(0).into_owned()));
    }
    Ok(x.norm_kind.norm(&diff.column(0).into_owned()) / nx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness() {
        assert_eq!(witness_n(c(0.5)), 1);
        assert_eq!(witness_n(c(1.0)), 2);
        assert_eq!(witness_n(C64::new(2.3, 4.0)), 3);
    }

    #[test]
    fn scalar_square_root() {
        let a = Operator::diagonal(&[2.0]).unwrap();
        let y = frac_power(&a, c(0.5), &Vector::from_real(&[1.0]), &QuadratureScheme::default()).unwrap();
        assert!((y.value.values[0] - c(2f64.sqrt())).norm() < 1e-8);
    }
}
