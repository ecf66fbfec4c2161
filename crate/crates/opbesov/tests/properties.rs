use num_complex::Complex64 as C64;
use opbesov::besov::{inhom_quasi_norm, quasi_triangle_constant, BesovIndex, NormOptions, NormResult};
use opbesov::fractional::{frac_power, semigroup_apply, spectral_frac_power};
use opbesov::interpolation::{CoupleSpec, KFunctional};
use opbesov::{Operator, QuadratureScheme, Vector};
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    a.sub(b).norm() / b.norm().max(1e-300)
}

fn eigenvalues(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n).prop_map(|v| v.into_iter().map(|e| 10f64.powf(e)).collect())
}

fn entries(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn lower(r: &NormResult) -> f64 {
    r.value - r.tail_bound
}

fn upper(r: &NormResult) -> f64 {
    r.value + r.tail_bound
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quasi_triangle_inequality(
        eig in eigenvalues(4), x in entries(4), y in entries(4),
        s in -0.4..0.4f64, q in prop::sample::select(vec![0.25, 0.5, 1.0, 2.0, f64::INFINITY]),
    ) {
        let a = Operator::diagonal(&eig).unwrap();
        let idx = BesovIndex::real(s, q, 0, 0.5, 1.0).unwrap();
        let opts = NormOptions::default();
        let (x, y) = (Vector::from_real(&x), Vector::from_real(&y));
        let nx = inhom_quasi_norm(&a, &idx, &x, &opts).unwrap();
        let ny = inhom_quasi_norm(&a, &idx, &y, &opts).unwrap();
        let nxy = inhom_quasi_norm(&a, &idx, &x.add(&y), &opts).unwrap();
        let k = quasi_triangle_constant(q);
        prop_assert!(lower(&nxy) <= k * (upper(&nx) + upper(&ny)) * (1.0 + 1e-9));
    }

    #[test]
    fn quasi_norm_is_absolutely_homogeneous(
        eig in eigenvalues(3), x in entries(3), re in -3.0..3.0f64, im in -3.0..3.0f64, s in -0.4..0.8f64,
    ) {
        prop_assume!(re.abs() + im.abs() > 1e-2);
        let a = Operator::diagonal(&eig).unwrap();
        let idx = BesovIndex::real(s, 1.0, 0, 0.5, 1.0).unwrap();
        let opts = NormOptions::default();
        let x = Vector::from_real(&x);
        let z = C64::new(re, im);
        let n1 = inhom_quasi_norm(&a, &idx, &x, &opts).unwrap();
        let nz = inhom_quasi_norm(&a, &idx, &x.scaled(z), &opts).unwrap();
        prop_assert!((nz.value - z.norm() * n1.value).abs() <= nz.tail_bound + z.norm() * n1.tail_bound + 1e-12 * nz.value);
    }

    #[test]
    fn larger_q_gives_smaller_norm(
        eig in eigenvalues(4), x in entries(4), s in -0.4..0.4f64, q1 in 0.3..3.0f64, dq in 0.0..4.0f64,
    ) {
        let a = Operator::diagonal(&eig).unwrap();
        let opts = NormOptions::default();
        let x = Vector::from_real(&x);
        let small = inhom_quasi_norm(&a, &BesovIndex::real(s, q1 + dq, 0, 0.5, 1.0).unwrap(), &x, &opts).unwrap();
        let big = inhom_quasi_norm(&a, &BesovIndex::real(s, q1, 0, 0.5, 1.0).unwrap(), &x, &opts).unwrap();
        prop_assert!(lower(&small) <= upper(&big) * (1.0 + 1e-9));
    }

    #[test]
    fn resolvent_identity(eig in eigenvalues(5), x in entries(5), l in -2.0..2.0f64, m in -2.0..2.0f64) {
        let (l, m) = (10f64.powf(l), 10f64.powf(m));
        let a = Operator::diagonal(&eig).unwrap();
        let x = Vector::from_real(&x);
        let lhs = a.resolvent(l, &x).unwrap().sub(&a.resolvent(m, &x).unwrap());
        let rhs = a.resolvent(l, &a.resolvent(m, &x).unwrap()).unwrap().scaled(c(m - l));
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-12 * (x.norm() / l.min(m)));
    }

    #[test]
    fn semigroup_law(eig in eigenvalues(5), x in entries(5), t in 0.0..3.0f64, s in 0.0..3.0f64) {
        let a = Operator::diagonal(&eig).unwrap();
        let x = Vector::from_real(&x);
        let once = semigroup_apply(&a, t + s, &x).unwrap();
        let twice = semigroup_apply(&a, t, &semigroup_apply(&a, s, &x).unwrap()).unwrap();
        prop_assert!(once.sub(&twice).norm() <= 1e-13 * x.norm());
        prop_assert!(once.norm() <= x.norm() * (1.0 + 1e-14));
    }

    #[test]
    fn powers_add(eig in eigenvalues(4), x in entries(4), p in 0.05..0.95f64, r in 0.05..0.95f64) {
        let a = Operator::diagonal(&eig).unwrap();
        let x = Vector::from_real(&x);
        let sch = QuadratureScheme::default();
        let inner = frac_power(&a, c(r), &x, &sch).unwrap().value;
        let composed = frac_power(&a, c(p), &inner, &sch).unwrap().value;
        let direct = spectral_frac_power(&a, c(p + r), &x).unwrap();
        prop_assert!(rel(&composed, &direct) <= 1e-7, "{}", rel(&composed, &direct));
    }

    #[test]
    fn k_functional_is_monotone_concave_and_below_both_endpoints(
        eig in eigenvalues(4), x in entries(4), alpha in 0.2..1.5f64,
    ) {
        let a = Operator::diagonal(&eig).unwrap();
        let x = Vector::from_real(&x);
        let couple = CoupleSpec::new(&a, c(alpha), 0.5, 2.0).unwrap();
        let kf = KFunctional::new(&couple, &x).unwrap();
        let ax = spectral_frac_power(&a, c(alpha), &x).unwrap().norm();
        let ts: Vec<f64> = (0..25).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
        let ks: Vec<f64> = ts.iter().map(|&t| kf.value(t).value).collect();
        let tol = 1e-9 * x.norm();
        for (t, k) in ts.iter().zip(&ks) {
            prop_assert!(*k <= x.norm() + tol && *k <= t * ax + tol);
        }
        for w in ks.windows(2) {
            prop_assert!(w[1] >= w[0] - tol);
        }
        // concavity: each interior value lies above the chord of its neighbours
        for i in 1..ts.len() - 1 {
            let lam = (ts[i + 1] - ts[i]) / (ts[i + 1] - ts[i - 1]);
            prop_assert!(ks[i] >= lam * ks[i - 1] + (1.0 - lam) * ks[i + 1] - tol);
        }
    }
}
