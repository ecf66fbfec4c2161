//! Complex Gamma function (Lanczos, g = 7, nine coefficients).

use num_complex::Complex64;
use std::f64::consts::PI;

const G: f64 = 7.0;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) for complex z. Returns infinity (real part) at the non-positive integers.
pub fn gamma(z: Complex64) -> Complex64 {
    if is_pole(z) {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::from(PI) / (s * gamma_lanczos(Complex64::new(1.0, 0.0) - z));
    }
    gamma_lanczos(z)
}

/// 1/Γ(z), entire; exactly zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    if is_pole(z) {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        let s = (z * PI).sin();
        return s * gamma_lanczos(Complex64::new(1.0, 0.0) - z) / PI;
    }
    gamma_lanczos(z).inv()
}

/// Real Γ(x) through the complex evaluator.
pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// ln Γ(x) for real x > 0, without overflow for large x.
pub fn ln_gamma_real(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_real(1.0 - x);
    }
    ln_gamma_lanczos(Complex64::new(x, 0.0)).re
}

fn gamma_lanczos(z: Complex64) -> Complex64 {
    ln_gamma_lanczos(z).exp()
}

fn ln_gamma_lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    // √(2π) t^{z+1/2} e^{−t} A(z), assembled in log form to avoid overflow
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(a)Γ(b) / (Γ(c)Γ(d)) computed with reciprocal Gammas where the denominator may vanish.
pub fn gamma_ratio(num: &[Complex64], den: &[Complex64]) -> Complex64 {
    let mut v = Complex64::new(1.0, 0.0);
    for &a in num {
        v *= gamma(a);
    }
    for &b in den {
        v *= rgamma(b);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integers_are_factorials() {
        let mut f = 1.0;
        for n in 1..15 {
            let g = gamma_real(n as f64);
            assert!((g / f - 1.0).abs() < 1e-13, "n={n}");
            f *= n as f64;
        }
    }

    #[test]
    fn half_integer() {
        assert!((gamma_real(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma_real(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_large() {
        // ln Γ(500) = ln(499!)
        let exact: f64 = (1..500).map(|k| (k as f64).ln()).sum();
        assert!((ln_gamma_real(500.0) - exact).abs() < 1e-10 * exact);
        assert!((ln_gamma_real(0.3) - gamma_real(0.3).ln()).abs() < 1e-13);
    }

    #[test]
    fn poles() {
        assert!(gamma_real(0.0).is_infinite());
        assert!(gamma_real(-3.0).is_infinite());
        assert_eq!(rgamma(Complex64::new(-2.0, 0.0)), Complex64::new(0.0, 0.0));
    }
}
