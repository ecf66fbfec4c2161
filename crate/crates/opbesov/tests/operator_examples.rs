use nalgebra::DMatrix;
use num_complex::Complex64;
use opbesov::operator::{estimate_nonnegativity_constants, induced_norm, log_grid};
use opbesov::opspec::build_operator;
use opbesov::{Error, NormKind, Operator, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    (&a.values - &b.values).norm() / b.values.norm().max(1e-300)
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> (Operator, DMatrix<Complex64>) {
    let g = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0)));
    let q = g.qr().q();
    let eig: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, eig.iter().map(|&v| c(v))));
    let m = &q * d * q.adjoint();
    (Operator::dense(m.clone()).unwrap(), m)
}

#[test]
fn apply_examples() {
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    assert_eq!(a.apply(&Vector::from_real(&[1.0, 1.0])).unwrap(), Vector::from_real(&[1.0, 4.0]));
    let t = Operator::torus_laplacian(8, 1).unwrap();
    let y = t.apply(&Vector::from_real(&[1.0; 8])).unwrap();
    assert!(y.values.norm() < 1e-12);
    let d = Operator::dense_real(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
    let y = d.apply(&Vector::from_real(&[1.0, 1.0])).unwrap();
    assert!(rel(&y, &Vector::from_real(&[3.0, 3.0])) < 1e-15);
    assert!(matches!(a.apply(&Vector::zeros(3)), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn resolvent_examples() {
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    let y = a.resolvent(1.0, &Vector::from_real(&[1.0, 1.0])).unwrap();
    assert!(rel(&y, &Vector::from_real(&[0.5, 0.2])) < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (op, m) = random_spd(16, &mut rng);
    let x = Vector::from_real(&(0..16).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>());
    let y = op.resolvent(0.37, &x).unwrap();
    // eigendecomposition oracle
    let eig = m.clone().symmetric_eigen();
    let coeffs = eig.eigenvectors.adjoint() * &x.values;
    let scaled = nalgebra::DVector::from_fn(16, |i, _| coeffs[i] / c(0.37 + eig.eigenvalues[i]));
    let oracle = Vector::new(&eig.eigenvectors * scaled);
    assert!(rel(&y, &oracle) < 1e-10);
    // identity decomposition
    for op in [&op, &a] {
        let x = Vector::from_real(&(0..op.dim()).map(|i| (i as f64).sin() + 0.3).collect::<Vec<_>>());
        let r = op.resolvent(1.0, &x).unwrap();
        let back = r.add(&op.apply(&r).unwrap());
        assert!(rel(&back, &x) < 1e-12);
    }
}

#[test]
fn constants_examples() {
    let a = Operator::diagonal(&[1.0, 4.0]).unwrap();
    assert_eq!((a.constants().m_a, a.constants().l_a), (1.0, 1.0));
    let s = a.shifted(1.0).unwrap();
    assert_eq!((s.constants().m_a, s.constants().l_a), (1.0, 1.0));
    let j = Operator::dense_real(&[vec![1.0, 10.0], vec![0.0, 1.0]]).unwrap();
    let (m, l) = (j.constants().m_a, j.constants().l_a);
    // exact 2×2 resolvent norm maximized on a dense grid
    let mut m_ref: f64 = 0.0;
    let mut l_ref: f64 = 0.0;
    for lam in log_grid(1e-4, 1e4, 20001) {
        let r = DMatrix::from_row_slice(2, 2, &[c(1.0 / (lam + 1.0)), c(-10.0 / (lam + 1.0).powi(2)), c(0.0), c(1.0 / (lam + 1.0))]);
        m_ref = m_ref.max(induced_norm(&(r.clone() * c(lam)), &NormKind::Euclidean));
        let am = DMatrix::from_row_slice(2, 2, &[c(1.0), c(10.0), c(0.0), c(1.0)]) * r;
        l_ref = l_ref.max(induced_norm(&am, &NormKind::Euclidean));
    }
    assert!(m > 1.0 && m.is_finite());
    assert!((m - m_ref).abs() < 1e-6 * m_ref, "{m} vs {m_ref}");
    assert!((l - l_ref).abs() < 1e-6 * l_ref, "{l} vs {l_ref}");
}

#[test]
fn nonnegativity_bounds_hold_on_resolvents() {
    let j = Operator::dense_real(&[vec![1.0, 10.0], vec![0.0, 1.0]]).unwrap();
    let k = j.constants();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let x = Vector::from_real(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let lam = 10f64.powf(rng.gen_range(-4.0..4.0));
        let r = j.resolvent(lam, &x).unwrap();
        assert!(r.scaled(c(lam)).norm() <= k.m_a * x.norm() * (1.0 + 1e-9));
        assert!(j.apply(&r).unwrap().norm() <= k.l_a * x.norm() * (1.0 + 1e-9));
    }
}

#[test]
fn inverse_swaps_constants() {
    let j = Operator::dense_real(&[vec![1.0, 3.0], vec![0.0, 2.0]]).unwrap();
    let inv = j.inverse().unwrap();
    let (a, b) = (j.constants(), inv.constants());
    assert!((a.m_a - b.l_a).abs() < 1e-6 * a.m_a, "{a:?} {b:?}");
    assert!((a.l_a - b.m_a).abs() < 1e-6 * a.l_a);
    let back = inv.inverse().unwrap();
    let x = Vector::from_real(&[0.3, -1.0]);
    assert!(rel(&back.apply(&x).unwrap(), &j.apply(&x).unwrap()) < 1e-10);
}

#[test]
fn divergence_is_reported_not_clamped() {
    // a nilpotent block has unbounded λ(λ+A)⁻¹ as λ → 0
    let n = Operator::dense_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
    assert!(n.is_err());
    let d = Operator::diagonal(&[1.0]).unwrap();
    let r = estimate_nonnegativity_constants(&d, &log_grid(1e-6, 1e6, 61), &NormKind::Euclidean).unwrap();
    assert_eq!(r, (1.0, 1.0));
}

#[test]
fn spec_strings() {
    let a = build_operator("diagonal [1,2,4]").unwrap();
    assert_eq!(a.spectral().unwrap().eigenvalues, vec![1.0, 2.0, 4.0]);
    let t = build_operator("torus_laplacian n=16").unwrap();
    let mut eig = t.spectral().unwrap().eigenvalues.clone();
    let mut expect: Vec<f64> = (0..16).map(|k| 256.0 * 4.0 * (std::f64::consts::PI * k as f64 / 16.0).sin().powi(2)).collect();
    eig.sort_by(f64::total_cmp);
    expect.sort_by(f64::total_cmp);
    for (e, x) in eig.iter().zip(&expect) {
        assert!((e - x).abs() < 1e-9);
    }
    // apply on plane waves matches the multipliers
    for k in 0..16 {
        let v: Vec<Complex64> = (0..16).map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * i) as f64 / 16.0)).collect();
        let x = Vector::from_complex(&v);
        let y = t.apply(&x).unwrap();
        let mult = 256.0 * 4.0 * (std::f64::consts::PI * k as f64 / 16.0).sin().powi(2);
        assert!(rel(&y, &x.scaled(c(mult))) < 1e-10 || (mult == 0.0 && y.values.norm() < 1e-9));
    }
    let inv = build_operator("inverse(diagonal [1,2,4])").unwrap();
    assert_eq!(inv.spectral().unwrap().eigenvalues, vec![1.0, 0.5, 0.25]);
    let s = build_operator("shifted(diagonal [1, 4], eps=1)").unwrap();
    assert_eq!(s.spectral().unwrap().eigenvalues, vec![2.0, 5.0]);
    let s = build_operator("shifted(torus_laplacian n=8 dims=2, 0.5)").unwrap();
    assert_eq!(s.dim(), 64);
    let f = build_operator("frac_power(diagonal [4, 9], 0.5)").unwrap();
    assert_eq!(f.spectral().unwrap().eigenvalues, vec![2.0, 3.0]);
    let d = build_operator("dense [[2, 1], [0, 3]]").unwrap();
    assert_eq!(d.dim(), 2);
    assert!(matches!(build_operator("inverse(diagonal [0, 1])"), Err(Error::NotInjective { .. })));
    assert!(matches!(build_operator("banana [1]"), Err(Error::Parse(_))));
    assert!(matches!(build_operator("diagonal [1, 2] extra"), Err(Error::Parse(_))));
    assert!(matches!(build_operator("diagonal [1, -2]"), Err(Error::NotNonNegative(_))));
}
