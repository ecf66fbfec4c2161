use nalgebra::DMatrix;
use num_complex::Complex64;
use opbesov::fractional::*;
use opbesov::operator::log_grid;
use opbesov::{Operator, QuadratureScheme, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    (&a.values - &b.values).norm() / b.values.norm().max(1e-300)
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Operator {
    let g = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0)));
    let q = g.qr().q();
    let eig: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, eig.iter().map(|&v| c(v))));
    Operator::dense(&q * d * q.adjoint()).unwrap()
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_complex(&(0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>())
}

#[test]
fn diag_square_root() {
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let y = frac_power(&a, c(0.5), &Vector::from_real(&[1.0, 1.0]), &QuadratureScheme::default()).unwrap();
    assert!(rel(&y.value, &Vector::from_real(&[1.0, 2.0])) < 1e-9, "{:?}", y.value);
}

#[test]
fn dense_spd_complex_exponent_matches_spectral() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_spd(16, &mut rng);
    let x = random_vec(16, &mut rng);
    let z = Complex64::new(0.7, 0.3);
    let q = frac_power(&a, z, &x, &QuadratureScheme::default()).unwrap();
    let s = spectral_frac_power(&a, z, &x).unwrap();
    assert!(rel(&q.value, &s) < 1e-6, "{}", rel(&q.value, &s));
}

#[test]
fn unified_examples() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let x = Vector::from_real(&[1.0, 1.0]);
    let y = frac_power_unified(&a, c(0.0), c(1.0), c(1.0), &x, &sch).unwrap();
    assert!(rel(&y.value, &x) < 1e-8);
    let y = frac_power_unified(&a, c(-0.5), c(1.0), c(0.5), &x, &sch).unwrap();
    assert!(rel(&y.value, &Vector::from_real(&[1.0, 0.5])) < 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let b = random_spd(8, &mut rng);
    let x = random_vec(8, &mut rng);
    let z = Complex64::new(0.5, 0.2);
    let y = frac_power_unified(&b, z, c(1.2), c(1.7), &x, &sch).unwrap();
    let s = spectral_frac_power(&b, z, &x).unwrap();
    assert!(rel(&y.value, &s) < 1e-6, "{}", rel(&y.value, &s));
}

#[test]
fn unified_nonnormal_matches_balakrishnan() {
    let sch = QuadratureScheme::default();
    let a = Operator::dense_real(&[vec![1.0, 2.0, 0.0], vec![0.0, 2.0, 1.0], vec![0.0, 0.0, 3.0]]).unwrap();
    let x = Vector::from_real(&[1.0, -1.0, 0.5]);
    let bal = frac_power(&a, c(0.6), &x, &sch).unwrap();
    let uni = frac_power_unified(&a, c(0.6), c(0.5), c(1.3), &x, &sch).unwrap();
    assert!(rel(&uni.value, &bal.value) < 1e-6, "{}", rel(&uni.value, &bal.value));
    // additivity A^{0.3} A^{0.6} = A^{0.9}
    let p = frac_power(&a, c(0.3), &bal.value, &sch).unwrap();
    let q = frac_power(&a, c(0.9), &x, &sch).unwrap();
    assert!(rel(&p.value, &q.value) < 1e-6);
}

#[test]
fn anchors() {
    let sch = QuadratureScheme::default();
    for &a in &[0.25, 0.5, 0.75, 1.5] {
        for &n in &[2usize, 3] {
            let v = euler_integral(a, n, &sch).unwrap();
            assert!((v - 1.0).abs() < 1e-8, "α={a} n={n}: {v}");
        }
    }
    for &a in &[0.25, 0.5, 0.75] {
        for &l in &[0.1, 1.0, 10.0] {
            let v = resolvent_scalar_integral(a, l, &sch).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "α={a} λ={l}: {v}");
        }
    }
}

#[test]
fn fractional_resolvent_examples() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[1.0]).unwrap();
    let y = frac_resolvent(&a, 0.5, 1.0, &Vector::from_real(&[1.0]), &sch, FracResolventVariant::Resolvent).unwrap();
    assert!((y.value.values[0] - c(0.5)).norm() < 1e-8);
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let y = frac_resolvent(&a, 0.5, 2.0, &Vector::from_real(&[1.0, 1.0]), &sch, FracResolventVariant::Resolvent).unwrap();
    assert!(rel(&y.value, &Vector::from_real(&[1.0 / 3.0, 0.25])) < 1e-8);
    let y = frac_resolvent(&a, 0.5, 2.0, &Vector::from_real(&[1.0, 1.0]), &sch, FracResolventVariant::Complement).unwrap();
    assert!(rel(&y.value, &Vector::from_real(&[1.0 / 3.0, 0.5])) < 1e-8);
}

#[test]
fn semigroup_examples() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let x = Vector::from_real(&[1.0, 1.0]);
    let y = semigroup_apply(&a, 2f64.ln(), &x).unwrap();
    assert!(rel(&y, &Vector::from_real(&[0.5, 1.0 / 16.0])) < 1e-14);
    let y = frac_power_via_semigroup(&a, c(0.5), c(1.0), &x, &sch).unwrap();
    assert!(rel(&y.value, &Vector::from_real(&[1.0, 2.0])) < 1e-7);
    let one = Operator::diagonal(&[1.0]).unwrap();
    let y = frac_power_via_semigroup(&one, c(0.3), c(2.0), &Vector::from_real(&[1.0]), &sch).unwrap();
    assert!((y.value.values[0] - c(1.0)).norm() < 1e-8);
}

#[test]
fn subordination_routes_agree() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[1.0]).unwrap();
    let x = Vector::from_real(&[1.0]);
    let k = subordinated_semigroup(&a, 0.5, 1.0, &x, &sch, SubordinationMode::Kernel).unwrap();
    let s = subordinated_semigroup(&a, 0.5, 1.0, &x, &sch, SubordinationMode::Spectral).unwrap();
    let err = (k.value.values[0] - s.value.values[0]).norm();
    eprintln!("kernel {} spectral {} err {err:e} residual {:e}", k.value.values[0], s.value.values[0], k.mass_residual);
    assert!(err < 1e-4);
    // closed form at α = 1/2
    for &(t, s) in &[(1.0, 0.3), (0.5, 2.0), (2.0, 1.0)] {
        let k = subordination_kernel(0.5, t, s, &sch).unwrap();
        let exact = t / (2.0 * std::f64::consts::PI.sqrt()) * s.powf(-1.5) * (-t * t / (4.0 * s)).exp();
        assert!((k - exact).abs() < 1e-10 * exact.max(1e-3), "t={t} s={s}: {k} vs {exact}");
    }
}

#[test]
fn ergodic_examples() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[0.0, 1.0]).unwrap();
    let x = Vector::from_real(&[1.0, 1.0]);
    let grid = log_grid(1e-12, 1e12, 25);
    let e = ergodic_limits(&a, c(1.0), &x, &grid, &sch).unwrap();
    assert!(rel(&e.limit_at_zero, &Vector::from_real(&[1.0, 0.0])) < 1e-9, "{:?}", e.limit_at_zero);
    assert!(rel(&e.range_limit_at_zero, &Vector::from_real(&[0.0, 1.0])) < 1e-9);
    assert!(e.converged);
    let b = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let e = ergodic_limits(&b, c(0.5), &x, &grid, &sch).unwrap();
    assert!(e.limit_at_zero.values.norm() < 1e-9);
    assert!(rel(&e.limit_at_infinity, &x) < 1e-9);
}

#[test]
fn reproducing_examples() {
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let x = Vector::from_real(&[1.0, 1.0]);
    let r = reproducing_residual(&a, c(1.0), 1, 1.0, &x, &sch).unwrap();
    assert!(r < 1e-8, "{r}");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = random_spd(8, &mut rng);
    let x = random_vec(8, &mut rng);
    let r = reproducing_residual(&b, c(2.0), 3, 0.7, &x, &sch).unwrap();
    assert!(r < 1e-6, "{r}");
    let r = reproducing_residual(&b, c(0.6), 2, 0.0, &x, &sch).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn exponents_at_the_edges_of_the_strip() {
    // slow λ^α tails at 0 and λ^{α−n} tails at ∞ once needed truncation points outside f64
    let sch = QuadratureScheme::default();
    let a = Operator::diagonal(&[0.05, 1.0, 30.0]).unwrap();
    let x = Vector::from_real(&[1.0, -2.0, 0.5]);
    for alpha in [c(0.003), c(0.997), Complex64::new(1.995, 0.4), Complex64::new(0.01, -0.7)] {
        let exact = spectral_frac_power(&a, alpha, &x).unwrap();
        let beta = c(alpha.re.floor() + 1.0);
        assert!(rel(&frac_power(&a, alpha, &x, &sch).unwrap().value, &exact) < 1e-9, "{alpha}");
        assert!(rel(&frac_power_unified(&a, alpha, c(1.0), beta, &x, &sch).unwrap().value, &exact) < 1e-9, "{alpha}");
        assert!(rel(&frac_power_via_semigroup(&a, alpha, beta, &x, &sch).unwrap().value, &exact) < 1e-9, "{alpha}");
    }
    // non-normal, so both small exponents go through quadrature: A^{−ε}A^{ε} = I
    let b = Operator::dense_real(&[vec![0.5, 2.0, 0.0], vec![0.0, 1.0, -1.0], vec![0.0, 0.0, 8.0]]).unwrap();
    assert!(b.spectral().is_none());
    let down = power_matrix(&b, c(-0.004), &sch).unwrap();
    let up = power_matrix(&b, c(0.004), &sch).unwrap();
    let id = DMatrix::<Complex64>::identity(3, 3);
    assert!((&down * &up - &id).norm() < 1e-9);
    assert!((&down - &id).norm() < 0.05);
}
