//! Explicit constants from the fractional-power estimates and the smoothness-reiteration lemmas.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::gamma::{gamma, gamma_real};
use crate::quadrature::{integrate_log, LogIntegrand, QuadratureScheme};

/// Smallest integer n with n > Re α.
pub fn order_above(alpha: C64) -> usize {
    (alpha.re.floor() as i64 + 1).max(1) as usize
}

/// C_{α,n} = Γ(Re α)Γ(n − Re α) / |Γ(α)Γ(n − α)|, for 0 < Re α < n.
pub fn c_alpha_n(alpha: C64, n: usize) -> f64 {
    let nf = n as f64;
    gamma_real(alpha.re) * gamma_real(nf - alpha.re) / (gamma(alpha) * gamma(C64::new(nf, 0.0) - alpha)).norm()
}

/// Constant of the moment inequality ‖A^α x‖ ≤ C ‖Aⁿx‖^{Re α/n} ‖x‖^{1 − Re α/n}.
pub fn moment_constant(alpha: C64, n: usize, m_a: f64) -> f64 {
    let nf = n as f64;
    let a = alpha.re;
    gamma_real(nf + 1.0) / (gamma(alpha) * gamma(C64::new(nf, 0.0) - alpha)).norm() * m_a.powf(a) * (m_a + 1.0).powf(nf - a)
        / (a * (nf - a))
}

/// f(t) = 1 + 2t cos πα + t².
pub fn cos_profile(alpha: f64, t: f64) -> f64 {
    1.0 + 2.0 * t * (PI * alpha).cos() + t * t
}

/// K_α with f(u) ≤ K_α f(t) for t/2 ≤ u ≤ t.
pub fn cos_constant(alpha: f64) -> f64 {
    if alpha <= 0.5 {
        1.0
    } else {
        0.25 * (1.0 + 3.0 / (PI * alpha).sin().powi(2))
    }
}

/// Kernel μ^{1−s}/f(μ) of the reiteration sequence operator.
pub fn t_kernel(s: f64, alpha: f64, mu: f64) -> f64 {
    t_kernel_log2(s, alpha, mu.log2())
}

/// [`t_kernel`] at μ = 2^e, arranged so that neither branch overflows.
pub fn t_kernel_log2(s: f64, alpha: f64, e: f64) -> f64 {
    let c = (PI * alpha).cos();
    if e > 0.0 {
        let r = 2f64.powf(-e);
        2f64.powf(-(1.0 + s) * e) / (1.0 + 2.0 * c * r + r * r)
    } else {
        let r = 2f64.powf(e);
        2f64.powf((1.0 - s) * e) / (1.0 + 2.0 * c * r + r * r)
    }
}

/// J_q = ∫₀^∞ (μ^{1−s}/f(μ))^q dμ/μ.
pub fn t_integral(s: f64, alpha: f64, q: f64, scheme: &QuadratureScheme) -> Result<f64> {
    let shape = LogIntegrand { lo_scale: 1.0, hi_scale: 1.0, decay_lo: (1.0 - s) * q, decay_hi: (1.0 + s) * q };
    Ok(integrate_log(scheme, shape, |mu| t_kernel(s, alpha, mu).powf(q))?.value)
}

/// The sequence operator (Ta)_j = Σ_i w(2^{−j}2^{iα}) a_i with w = [`t_kernel`], applied to a
/// sequence supported on i ∈ [i0, i0 + a.len()). Returns b on the window of j where it is not
/// negligible.
pub fn apply_t(s: f64, alpha: f64, i0: i32, a: &[f64]) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let i1 = i0 + a.len() as i32 - 1;
    // outside [i0 α − W, i1 α + W] every weight is below 2^{−64} times the largest one
    let w = (64.0 / (1.0 - s).min(1.0 + s)).ceil() as i32;
    let j_lo = (f64::from(i0) * alpha).floor() as i32 - w;
    let j_hi = (f64::from(i1) * alpha).ceil() as i32 + w;
    let mut out = Vec::new();
    for j in j_lo..=j_hi {
        let b: f64 = a
            .iter()
            .enumerate()
            .map(|(k, ai)| {
                let i = i0 + k as i32;
                ai * t_kernel_log2(s, alpha, f64::from(i) * alpha - f64::from(j))
            })
            .sum();
        out.push(b);
    }
    out
}

/// Upper bound for ‖T‖ on ℓ_q: (J_q K_α)^{1/q} 2^{1−s+1/q} for q ≤ 1, α^{−1}K_α 2^{α(1−s)+1} J_1
/// for q = ∞, and the Riesz–Thorin bound √(‖T‖₁‖T‖_∞) at q = 2.
pub fn t_operator_bound(s: f64, alpha: f64, q: f64, scheme: &QuadratureScheme) -> Result<Option<f64>> {
    let k = cos_constant(alpha);
    let low = |q: f64| -> Result<f64> { Ok((t_integral(s, alpha, q, scheme)? * k).powf(1.0 / q) * 2f64.powf(1.0 - s + 1.0 / q)) };
    let inf = || -> Result<f64> { Ok(k * 2f64.powf(alpha * (1.0 - s) + 1.0) * t_integral(s, alpha, 1.0, scheme)? / alpha) };
    Ok(if q <= 1.0 {
        Some(low(q)?)
    } else if q.is_infinite() {
        Some(inf()?)
    } else if q == 2.0 {
        Some((low(1.0)? * inf()?).sqrt())
    } else {
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_exponents_have_unit_constant() {
        for a in [0.3, 0.5, 1.5, 2.7] {
            let n = order_above(C64::new(a, 0.0));
            assert!((c_alpha_n(C64::new(a, 0.0), n) - 1.0).abs() < 1e-12);
        }
        assert!(c_alpha_n(C64::new(0.5, 1.0), 1) > 1.0);
        assert_eq!(order_above(C64::new(2.0, 0.0)), 3);
    }

    #[test]
    fn cos_constant_values() {
        assert_eq!(cos_constant(0.5), 1.0);
        assert!((cos_constant(0.75) - 0.25 * (1.0 + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn t_of_unit_impulse() {
        let b = apply_t(0.5, 0.5, 0, &[1.0]);
        let direct: f64 = (-3000..3000).map(|j| t_kernel_log2(0.5, 0.5, -f64::from(j)).powi(2)).sum::<f64>().sqrt();
        let got = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((got - direct).abs() < 1e-12 * direct);
    }
}
