//! K-functional of the couple (X, D(A^α)) and the real-interpolation quasi-norms it generates.
//!
//! With C = A^α, first-order stationarity of ‖x − y‖ + t‖Cy‖ puts the minimizer on the curve
//! y_μ = (I + μCᴴC)⁻¹x, μ ≥ 0, apart from the corner y = 0. In a singular basis of C the
//! objective along the curve costs O(n) per evaluation. K(t,x) equals t‖Cx‖ exactly for
//! t ≤ ‖Cx‖/‖CᴴCx‖ and ‖x‖ exactly for t ≥ ‖C^{−ᴴ}x‖/‖x‖, so the interpolation integral is
//! analytic outside that window and needs quadrature only inside it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::besov::NormResult;
use crate::error::{Error, Result};
use crate::fractional::{cpow, power_matrix};
use crate::operator::{Operator, C64};
use crate::quadrature::{golden_section, integrate_log_interval, QuadratureScheme};
use crate::vector::{NormKind, Vector};

/// Minimum number of μ samples in the bracketing scan.
const MU_SCAN: usize = 200;
const PERTURBATION_DIRECTIONS: usize = 64;

/// The couple (X, D(A^α)) with seminorm ‖A^α·‖, and the interpolation parameters (θ, q).
#[derive(Debug, Clone, Copy)]
pub struct CoupleSpec<'a> {
    pub operator: &'a Operator,
    pub alpha: C64,
    pub theta: f64,
    pub q: f64,
}

impl<'a> CoupleSpec<'a> {
    pub fn new(operator: &'a Operator, alpha: C64, theta: f64, q: f64) -> Result<Self> {
        if !(alpha.re > 0.0) {
            return Err(Error::Inadmissible(format!("couple needs Re α > 0, got {alpha}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Inadmissible(format!("θ must lie in (0, 1), got {theta}")));
        }
        if !(q > 0.0) {
            return Err(Error::Inadmissible(format!("q must lie in (0, ∞], got {q}")));
        }
        Ok(CoupleSpec { operator, alpha, theta, q })
    }
}

/// One evaluation of K(t, x).
#[derive(Debug, Clone, PartialEq)]
pub struct KValue {
    pub value: f64,
    /// Curve parameter of the minimizer; `None` when y = 0 wins, ∞ for the kernel projection.
    pub mu: Option<f64>,
    /// Set when the scan's best point sat at an end of the μ range (monotone objective).
    pub at_endpoint: bool,
}

/// x and C = A^α expressed in a singular basis of C.
#[derive(Debug, Clone)]
pub struct KFunctional {
    sigma2: Vec<f64>,
    weights: Vec<f64>,
    coeffs: DVector<C64>,
    /// maps singular-basis coefficients back to X
    basis: Basis,
    c_matrix: nalgebra::DMatrix<C64>,
    x: Vector,
    x_norm: f64,
    cx_norm: f64,
    mu_range: (f64, f64),
}

#[derive(Debug, Clone)]
enum Basis {
    Eigen(crate::operator::SpectralData),
    Right(nalgebra::DMatrix<C64>),
}

impl KFunctional {
    pub fn new(couple: &CoupleSpec, x: &Vector) -> Result<Self> {
        let a = couple.operator;
        if a.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: x.dim() });
        }
        if x.norm_kind != NormKind::Euclidean {
            return Err(Error::Unsupported("the K-functional minimizer assumes the euclidean ambient norm".into()));
        }
        let c_matrix = power_matrix(a, couple.alpha, &QuadratureScheme::default())?;
        let (sigma, coeffs, basis) = match a.spectral() {
            Some(sp) => {
                let sigma: Vec<f64> = sp.eigenvalues.iter().map(|&m| if m > 0.0 { cpow(m, couple.alpha).norm() } else { 0.0 }).collect();
                (sigma, sp.to_eigen(&x.values), Basis::Eigen(sp.clone()))
            }
            None => {
                let svd = c_matrix.clone().svd(false, true);
                let v_t = svd.v_t.expect("requested");
                let v = v_t.adjoint();
                (svd.singular_values.iter().copied().collect(), &v_t * &x.values, Basis::Right(v))
            }
        };
        let sigma2: Vec<f64> = sigma.iter().map(|s| s * s).collect();
        let weights: Vec<f64> = coeffs.iter().map(|z| z.norm_sqr()).collect();
        let cx_norm = sigma2.iter().zip(&weights).map(|(s, w)| s * w).sum::<f64>().sqrt();
        let s_max = sigma2.iter().copied().fold(0.0, f64::max);
        let s_min = sigma2.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
        let mu_range = if s_max > 0.0 { (1e-12 / s_max, 1e12 / s_min) } else { (1.0, 1.0) };
        Ok(KFunctional { sigma2, weights, coeffs, basis, c_matrix, x_norm: x.norm(), x: x.clone(), cx_norm, mu_range })
    }

    fn phi(&self, t: f64, mu: f64) -> f64 {
        let mut a = 0.0;
        let mut b = 0.0;
        for (&s2, &w) in self.sigma2.iter().zip(&self.weights) {
            let ms = mu * s2;
            let keep = if ms > 0.0 { 1.0 / (1.0 + 1.0 / ms) } else { 0.0 };
            a += w * keep * keep;
            b += w * s2 / ((1.0 + ms) * (1.0 + ms));
        }
        a.sqrt() + t * b.sqrt()
    }

    /// ‖x − P_ker x‖, the value at μ = ∞.
    fn phi_infinity(&self) -> f64 {
        self.sigma2.iter().zip(&self.weights).filter(|(s, _)| **s > 0.0).map(|(_, w)| w).sum::<f64>().sqrt()
    }

    /// t ≤ t_lo gives K = t‖Cx‖ and t ≥ t_hi gives K = ‖x‖.
    pub fn kinks(&self) -> (f64, f64) {
        let bx = self.sigma2.iter().zip(&self.weights).map(|(s, w)| s * s * w).sum::<f64>().sqrt();
        let t_lo = if bx > 0.0 { self.cx_norm / bx } else { f64::INFINITY };
        let inv = self
            .sigma2
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| {
                if *w == 0.0 {
                    0.0
                } else if *s > 0.0 {
                    w / s
                } else {
                    f64::INFINITY
                }
            })
            .sum::<f64>()
            .sqrt();
        let t_hi = if self.x_norm > 0.0 { inv / self.x_norm } else { 0.0 };
        (t_lo.min(t_hi), t_hi)
    }

    pub fn value(&self, t: f64) -> KValue {
        if self.x_norm == 0.0 {
            return KValue { value: 0.0, mu: Some(0.0), at_endpoint: false };
        }
        let mut best = KValue { value: self.x_norm, mu: None, at_endpoint: false };
        let mut consider = |v: f64, mu: Option<f64>, end: bool| {
            if v < best.value {
                best = KValue { value: v, mu, at_endpoint: end };
            }
        };
        consider(t * self.cx_norm, Some(0.0), false);
        consider(self.phi_infinity(), Some(f64::INFINITY), false);
        let (lo, hi) = (self.mu_range.0.ln(), self.mu_range.1.ln());
        let count = MU_SCAN.max(((hi - lo) / 10f64.ln() * 8.0).ceil() as usize);
        let step = (hi - lo) / (count - 1) as f64;
        let mut scan_best = (0usize, f64::INFINITY);
        for i in 0..count {
            let v = self.phi(t, (lo + step * i as f64).exp());
            if v < scan_best.1 {
                scan_best = (i, v);
            }
        }
        let i = scan_best.0;
        let end = i == 0 || i == count - 1;
        let ua = lo + step * i.saturating_sub(1) as f64;
        let ub = lo + step * (i + 1).min(count - 1) as f64;
        let (u, v) = golden_section(|u| self.phi(t, u.exp()), ua, ub, 1e-14, 300);
        if v <= scan_best.1 {
            consider(v, Some(u.exp()), end);
        } else {
            consider(scan_best.1, Some((lo + step * i as f64).exp()), end);
        }
        best
    }

    /// The minimizing decomposition's X₁ component y.
    pub fn minimizer(&self, k: &KValue) -> DVector<C64> {
        let n = self.coeffs.len();
        let scaled = match k.mu {
            None => DVector::zeros(n),
            Some(mu) => DVector::from_fn(n, |i, _| {
                let s2 = self.sigma2[i];
                let f = if mu.is_infinite() {
                    if s2 > 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    1.0 / (1.0 + mu * s2)
                };
                self.coeffs[i] * f
            }),
        };
        match &self.basis {
            Basis::Eigen(sp) => sp.from_eigen(&scaled),
            Basis::Right(v) => v * scaled,
        }
    }

    fn objective(&self, t: f64, y: &DVector<C64>) -> f64 {
        (&self.x.values - y).norm() + t * (&self.c_matrix * y).norm()
    }

    /// Largest relative improvement found by perturbing the minimizer in 64 random directions
    /// at several step sizes; the minimizer is accepted when this stays below 1e−9.
    pub fn perturbation_gain(&self, t: f64, seed: u64) -> f64 {
        let k = self.value(t);
        let y = self.minimizer(&k);
        let base = self.objective(t, &y);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = y.len();
        let mut worst: f64 = 0.0;
        for _ in 0..PERTURBATION_DIRECTIONS {
            let d = DVector::from_fn(n, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            });
            let d = &d / Complex64::new(d.norm(), 0.0);
            for h in [1e-2, 1e-4, 1e-6] {
                let step = d.clone() * Complex64::new(h * self.x_norm, 0.0);
                let v = self.objective(t, &(&y + step));
                worst = worst.max((base - v) / base);
            }
        }
        worst
    }
}

/// K(t, x) = inf over x = x₀ + x₁ of ‖x₀‖ + t‖A^α x₁‖.
pub fn k_functional(couple: &CoupleSpec, t: f64, x: &Vector) -> Result<KValue> {
    if !(t > 0.0) {
        return Err(Error::Inadmissible(format!("t must be positive, got {t}")));
    }
    Ok(KFunctional::new(couple, x)?.value(t))
}

/// (∫₀^∞ (t^{−θ}K(t,x))^q dt/t)^{1/q}, or sup_t t^{−θ}K(t,x) for q = ∞.
pub fn interpolation_norm(couple: &CoupleSpec, x: &Vector, scheme: &QuadratureScheme) -> Result<NormResult> {
    let kf = KFunctional::new(couple, x)?;
    if kf.x_norm == 0.0 {
        return Ok(NormResult { value: 0.0, j_range_used: (0, 0), tail_bound: 0.0, term_trace: None });
    }
    let (theta, q) = (couple.theta, couple.q);
    let (t_lo, t_hi) = kf.kinks();
    if !t_hi.is_finite() {
        return Err(Error::NotInjective { sigma_min: 0.0, sigma_max: couple.operator.scale().sigma_max });
    }
    let range = (t_lo.log2().floor() as i32, t_hi.log2().ceil() as i32);
    if q.is_infinite() {
        let g = |u: f64| {
            let t = u.exp();
            t.powf(-theta) * kf.value(t).value
        };
        let (ua, ub) = (t_lo.ln(), t_hi.ln());
        let count = 400;
        let mut best = (ua, g(ua));
        for i in 1..=count {
            let u = ua + (ub - ua) * i as f64 / count as f64;
            let v = g(u);
            if v > best.1 {
                best = (u, v);
            }
        }
        let w = (ub - ua) / count as f64;
        let (_, v) = golden_section(|u| -g(u), (best.0 - w).max(ua), (best.0 + w).min(ub), 1e-13, 300);
        return Ok(NormResult { value: best.1.max(-v), j_range_used: range, tail_bound: 0.0, term_trace: None });
    }
    let below = (kf.cx_norm * t_lo.powf(1.0 - theta)).powf(q) / ((1.0 - theta) * q);
    let above = (kf.x_norm * t_hi.powf(-theta)).powf(q) / (theta * q);
    let middle = if t_hi > t_lo * (1.0 + 1e-14) {
        integrate_log_interval(scheme, t_lo, t_hi, |t| (t.powf(-theta) * kf.value(t).value).powf(q))?.value
    } else {
        0.0
    };
    Ok(NormResult { value: (below + middle + above).powf(1.0 / q), j_range_used: range, tail_bound: 0.0, term_trace: None })
}
