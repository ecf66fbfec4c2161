//! Log-substituted quadrature for integrals of the form ∫₀^∞ f(λ) dλ/λ.
//!
//! With λ = e^u the integrand becomes a smooth function on the real line whose tails
//! decay like e^{ρ₀u} (u → −∞) and e^{−ρ∞u} (u → +∞). The truncated rule adds the
//! power-law tail integrals f(a)/ρ₀ and f(b)/ρ∞ and widens [a, b] until those tails
//! fall below the requested fraction of the computed value.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    TrapezoidLog,
    GaussLegendrePanels,
}

/// `u_min`/`u_max` are offsets (in log units) below the lower and above the upper
/// characteristic scale of each integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScheme {
    pub rule: QuadratureRule,
    pub u_min: f64,
    pub u_max: f64,
    pub nodes: usize,
    pub tail_tolerance: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            rule: QuadratureRule::TrapezoidLog,
            u_min: -(1e8f64).ln(),
            u_max: (1e8f64).ln(),
            nodes: 2048,
            tail_tolerance: 1e-10,
        }
    }
}

/// Largest step in u the rules are allowed to take.
pub const MAX_STEP: f64 = 0.25;
const PANEL_ORDER: usize = 16;
const MAX_WIDENINGS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature scheme: {0}")]
    InvalidScheme(String),
    #[error("tail bound {tail:e} not below {tolerance:e} x value {value:e} after widening to [{lo}, {hi}]")]
    TailNotCertified { tail: f64, value: f64, tolerance: f64, lo: f64, hi: f64 },
    #[error("integrand is not finite at u = {0}")]
    NonFinite(f64),
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.u_min < self.u_max) {
            return Err(QuadError::InvalidScheme("u_min must be below u_max".into()));
        }
        if self.nodes < 16 {
            return Err(QuadError::InvalidScheme("at least 16 nodes are required".into()));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(QuadError::InvalidScheme("tail_tolerance must be positive".into()));
        }
        Ok(())
    }

    /// A cheaper copy used for integrals nested inside other integrals.
    pub fn inner(&self) -> QuadratureScheme {
        QuadratureScheme { nodes: 16, ..*self }
    }
}

/// Values that can be accumulated by the quadrature rules.
pub trait QuadValue: Clone {
    fn zeros_like(&self) -> Self;
    fn axpy(&mut self, w: f64, other: &Self);
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zeros_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for DVector<Complex64> {
    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b * w;
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for DMatrix<Complex64> {
    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += b * w;
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl QuadValue for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn axpy(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += w * b;
        }
    }
    fn magnitude(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Asymptotic description of an integrand in the variable λ (measure dλ/λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIntegrand {
    /// Scale below which the integrand is in its λ → 0 regime.
    pub lo_scale: f64,
    /// Scale above which the integrand is in its λ → ∞ regime.
    pub hi_scale: f64,
    /// f(λ) = O(λ^{decay_lo}) as λ → 0; `f64::INFINITY` for faster than any power.
    pub decay_lo: f64,
    /// f(λ) = O(λ^{−decay_hi}) as λ → ∞.
    pub decay_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOutput<T> {
    pub value: T,
    /// Declared bound on the integral outside the sampled range.
    pub tail_bound: f64,
    pub nodes: usize,
    pub u_range: (f64, f64),
}

/// ∫₀^∞ f(λ) dλ/λ.
pub fn integrate_log<T, F>(scheme: &QuadratureScheme, shape: LogIntegrand, mut f: F) -> Result<QuadOutput<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    scheme.validate()?;
    let lo = shape.lo_scale.max(f64::MIN_POSITIVE).ln() + scheme.u_min;
    let hi = shape.hi_scale.max(f64::MIN_POSITIVE).ln() + scheme.u_max;
    integrate_line(scheme, lo, hi, shape.decay_lo, shape.decay_hi, |u| f(u.exp()))
}

/// ∫_{lower}^∞ f(λ) dλ/λ, using λ = lower·(1 + e^w) so that the hard endpoint becomes
/// an exponentially decaying tail.
pub fn integrate_above<T, F>(
    scheme: &QuadratureScheme,
    lower: f64,
    hi_scale: f64,
    decay_hi: f64,
    mut f: F,
) -> Result<QuadOutput<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    scheme.validate()?;
    let lo = scheme.u_min;
    let hi = (hi_scale / lower).max(1.0).ln() + scheme.u_max;
    integrate_line(scheme, lo, hi, 1.0, decay_hi, |w| {
        let ew = w.exp();
        let v = f(lower * (1.0 + ew));
        let mut out = v.zeros_like();
        out.axpy(ew / (1.0 + ew), &v);
        out
    })
}

/// ∫_a^b f(λ) dλ/λ over a finite range with Gauss–Legendre panels in u = ln λ.
pub fn integrate_log_interval<T, F>(scheme: &QuadratureScheme, a: f64, b: f64, mut f: F) -> Result<QuadOutput<T>, QuadError>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    scheme.validate()?;
    let (ua, ub) = (a.ln(), b.ln());
    let panels = panel_count(ub - ua, scheme.nodes);
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let width = (ub - ua) / panels as f64;
    let mut acc: Option<T> = None;
    for p in 0..panels {
        let c = ua + (p as f64 + 0.5) * width;
        for (xi, wi) in x.iter().zip(w.iter()) {
            let u = c + 0.5 * width * xi;
            let v = f(u.exp());
            check_finite(&v, u)?;
            accumulate(&mut acc, 0.5 * width * wi, &v);
        }
    }
    Ok(QuadOutput { value: acc.expect("at least one panel"), tail_bound: 0.0, nodes: panels * PANEL_ORDER, u_range: (ua, ub) })
}

fn panel_count(width: f64, nodes: usize) -> usize {
    let by_nodes = (nodes / PANEL_ORDER).max(1);
    // each panel of order 16 resolves about four units of u at full accuracy
    let by_width = (width / 2.0).ceil() as usize;
    by_nodes.max(by_width).max(1)
}

fn accumulate<T: QuadValue>(acc: &mut Option<T>, w: f64, v: &T) {
    match acc {
        Some(a) => a.axpy(w, v),
        None => {
            let mut z = v.zeros_like();
            z.axpy(w, v);
            *acc = Some(z);
        }
    }
}

fn check_finite<T: QuadValue>(v: &T, u: f64) -> Result<(), QuadError> {
    if v.magnitude().is_finite() {
        Ok(())
    } else {
        Err(QuadError::NonFinite(u))
    }
}

/// ∫_ℝ g(u) du where g decays like e^{ρ₀u} at −∞ and e^{−ρ∞u} at +∞.
pub fn integrate_line<T, G>(
    scheme: &QuadratureScheme,
    mut lo: f64,
    mut hi: f64,
    rho_lo: f64,
    rho_hi: f64,
    mut g: G,
) -> Result<QuadOutput<T>, QuadError>
where
    T: QuadValue,
    G: FnMut(f64) -> T,
{
    scheme.validate()?;
    let mut last: Option<(T, f64)> = None;
    for _ in 0..=MAX_WIDENINGS {
        let (value, g_lo, g_hi, nodes) = match scheme.rule {
            QuadratureRule::TrapezoidLog => trapezoid(scheme.nodes, lo, hi, &mut g)?,
            QuadratureRule::GaussLegendrePanels => panels(scheme.nodes, lo, hi, &mut g)?,
        };
        let t_lo = tail_integral(g_lo.magnitude(), rho_lo);
        let t_hi = tail_integral(g_hi.magnitude(), rho_hi);
        let mut total = value;
        if rho_lo.is_finite() && rho_lo > 0.0 {
            total.axpy(1.0 / rho_lo, &g_lo);
        }
        if rho_hi.is_finite() && rho_hi > 0.0 {
            total.axpy(1.0 / rho_hi, &g_hi);
        }
        let mag = total.magnitude();
        let tail = t_lo + t_hi;
        let budget = scheme.tail_tolerance * mag;
        if tail <= budget || (tail == 0.0) {
            return Ok(QuadOutput { value: total, tail_bound: tail, nodes, u_range: (lo, hi) });
        }
        last = Some((total, tail));
        if mag == 0.0 {
            break;
        }
        // widen each side in proportion to its excess
        if t_lo > 0.5 * budget {
            lo -= widen_by(t_lo, 0.5 * budget, rho_lo);
        }
        if t_hi > 0.5 * budget {
            hi += widen_by(t_hi, 0.5 * budget, rho_hi);
        }
    }
    let (total, tail) = last.expect("loop ran");
    Err(QuadError::TailNotCertified { tail, value: total.magnitude(), tolerance: scheme.tail_tolerance, lo, hi })
}

fn tail_integral(edge: f64, rho: f64) -> f64 {
    if edge == 0.0 || rho.is_infinite() {
        0.0
    } else if rho > 0.0 {
        edge / rho
    } else {
        f64::INFINITY
    }
}

fn widen_by(tail: f64, target: f64, rho: f64) -> f64 {
    let rho = if rho.is_finite() && rho > 0.0 { rho } else { 1.0 };
    let ratio = (tail / target).max(1.0);
    (ratio.ln() / rho).clamp(1.0, 400.0) + 1.0
}

fn trapezoid<T, G>(min_nodes: usize, lo: f64, hi: f64, g: &mut G) -> Result<(T, T, T, usize), QuadError>
where
    T: QuadValue,
    G: FnMut(f64) -> T,
{
    let width = hi - lo;
    let n = min_nodes.max((width / MAX_STEP).ceil() as usize + 1);
    let h = width / (n - 1) as f64;
    let mut acc: Option<T> = None;
    let mut first: Option<T> = None;
    let mut last: Option<T> = None;
    for i in 0..n {
        let u = lo + h * i as f64;
        let v = g(u);
        check_finite(&v, u)?;
        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
        accumulate(&mut acc, w, &v);
        if i == 0 {
            first = Some(v.clone());
        }
        if i == n - 1 {
            last = Some(v);
        }
    }
    Ok((acc.unwrap(), first.unwrap(), last.unwrap(), n))
}

fn panels<T, G>(min_nodes: usize, lo: f64, hi: f64, g: &mut G) -> Result<(T, T, T, usize), QuadError>
where
    T: QuadValue,
    G: FnMut(f64) -> T,
{
    let width = hi - lo;
    let count = panel_count(width, min_nodes).max((width / (PANEL_ORDER as f64 * MAX_STEP)).ceil() as usize);
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let pw = width / count as f64;
    let mut acc: Option<T> = None;
    for p in 0..count {
        let c = lo + (p as f64 + 0.5) * pw;
        for (xi, wi) in x.iter().zip(w.iter()) {
            let u = c + 0.5 * pw * xi;
            let v = g(u);
            check_finite(&v, u)?;
            accumulate(&mut acc, 0.5 * pw * wi, &v);
        }
    }
    let g_lo = g(lo);
    let g_hi = g(hi);
    check_finite(&g_lo, lo)?;
    check_finite(&g_hi, hi)?;
    Ok((acc.unwrap(), g_lo, g_hi, count * PANEL_ORDER))
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Golden-section minimization of a unimodal function on [a, b].
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
