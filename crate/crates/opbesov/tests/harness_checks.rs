use num_complex::Complex64 as C64;
use opbesov::besov::BesovIndex;
use opbesov::fractional::ergodic_limits;
use opbesov::harness::constants::{apply_t, c_alpha_n, moment_constant, t_integral, t_operator_bound};
use opbesov::harness::{
    lookup, registered_ids, run_check, run_suite, EnsembleSpec, EquivalenceReport, HarnessConfig, OperatorFamily, VectorSampler, Verdict,
};
use opbesov::operator::log_grid;
use opbesov::{Operator, QuadratureScheme, Vector};

const REGISTRY_IDS: [&str; 27] = [
    "k_independence",
    "alpha_independence",
    "full_independence",
    "homog_independence",
    "continuity_equiv",
    "embed_q",
    "embed_s",
    "translation",
    "lifting_pos",
    "lifting_equiv",
    "reiteration",
    "interpolation",
    "inverse_breve",
    "inverse_homog",
    "inhom_homog_cap",
    "domain_sandwich",
    "denseness",
    "ergodicity",
    "semigroup_norm",
    "homog_semigroup_norm",
    "subordinated_norm",
    "cos_estimate",
    "ellq_operator",
    "uniform_bounds",
    "moment",
    "spectral_map",
    "classical_torus",
];

fn ids(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

#[test]
fn every_registry_row_is_registered_once() {
    let reg = registered_ids();
    for id in REGISTRY_IDS {
        assert_eq!(reg.iter().filter(|r| **r == id).count(), 1, "{id}");
        let e = lookup(id).unwrap();
        assert!(!e.paper_ref.is_empty() && !e.quote.is_empty());
    }
    assert!(lookup("semigroup_property").is_some());
    assert!(lookup("resolvent_identity").is_some());
    assert!(lookup("gamma_mode").is_none());
}

#[test]
fn empty_suite_is_empty_success() {
    let r = run_suite(&[], &HarnessConfig::default()).unwrap();
    assert!(r.is_empty());
}

#[test]
fn unknown_id_is_rejected() {
    assert!(run_suite(&ids(&["embed_q", "nope"]), &HarnessConfig::default()).is_err());
}

#[test]
fn embed_q_and_cos_estimate_pass_on_defaults() {
    let reports = run_suite(&ids(&["embed_q", "cos_estimate"]), &HarnessConfig::default()).unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0].check_id, "embed_q");
    assert_eq!(reports[1].check_id, "cos_estimate");
    for r in &reports {
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let v = r.violation_stats.as_ref().unwrap();
        assert_eq!(v.violations, 0);
    }
    assert_eq!(reports[1].violation_stats.as_ref().unwrap().evaluations, 9);
}

#[test]
fn embed_q_on_the_single_documented_ensemble() {
    let cfg = HarnessConfig {
        ensembles: Some(vec![EnsembleSpec::new(
            OperatorFamily::DiagLoguniform { n: 8, lambda_min: 0.1, lambda_max: 10.0 },
            VectorSampler::Gaussian,
            100,
            7,
        )]),
        ..HarnessConfig::default()
    };
    let r = run_check("embed_q", &cfg).unwrap();
    assert_eq!(r.samples, 100);
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.violation_stats.unwrap().evaluations, 300);
}

#[test]
fn reiteration_ceiling_carries_provenance() {
    let r = run_check("reiteration", &HarnessConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass, "{:?}", r.failures);
    let g = r.ratio_stats.iter().find(|g| g.group == "alpha=0.5 s=0.3 q=2").unwrap();
    assert!(g.ratio_min.is_finite() && g.ratio_max.is_finite() && g.ratio_min > 0.0);
    let c = g.calibration.as_ref().unwrap();
    assert!(c.family.contains("diag_loguniform(4, 0.01, 100)"), "{}", c.family);
    assert_eq!(c.safety_factor, 10.0);
    assert!((c.ceiling - 10.0 * c.observed_spread).abs() <= 1e-12 * c.ceiling);
    assert!(g.spread <= c.ceiling);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let cfg = HarnessConfig { seed: 11, count: Some(3), ..HarnessConfig::default() };
    let suite = ids(&["k_independence", "moment", "spectral_map", "ellq_operator"]);
    let a = run_suite(&suite, &cfg).unwrap();
    let b = run_suite(&suite, &cfg).unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    assert_eq!(ja, serde_json::to_string(&b).unwrap());
    let back: Vec<EquivalenceReport> = serde_json::from_str(&ja).unwrap();
    assert_eq!(back, a);
    let other = run_suite(&suite, &HarnessConfig { seed: 12, ..cfg.clone() }).unwrap();
    assert_ne!(other[0].config_hash, a[0].config_hash);
}

#[test]
fn inadmissible_grid_is_degenerate_not_a_crash() {
    // s = 2 with β = 1 violates −Re α < s < Re β for every draw
    let bad = BesovIndex { s: 2.0, q: 2.0, k: 0, alpha: C64::new(1.0, 0.0), beta: C64::new(1.0, 0.0) };
    let cfg = HarnessConfig { count: Some(2), index_grid: Some(vec![bad]), ..HarnessConfig::default() };
    let r = run_check("k_independence", &cfg).unwrap();
    assert_eq!(r.verdict, Verdict::Degenerate);
    assert!(r.failures.iter().all(|f| f.reason.starts_with("degenerate")));
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = HarnessConfig::default();
    cfg.tolerance.safety_factor = 0.5;
    assert!(run_check("embed_q", &cfg).is_err());
    let text = r#"{"seed": 1, "gamma_mode": true}"#;
    assert!(serde_json::from_str::<HarnessConfig>(text).is_err());
}

#[test]
fn kernel_projection_of_a_singular_diagonal() {
    let a = Operator::diagonal(&[0.0, 0.5, 3.0]).unwrap();
    let x = Vector::from_real(&[1.0, -2.0, 0.5]);
    let lim = ergodic_limits(&a, C64::new(0.5, 0.0), &x, &log_grid(1e-12, 1e12, 25), &QuadratureScheme::default()).unwrap();
    let p = Vector::from_real(&[1.0, 0.0, 0.0]);
    assert!(lim.limit_at_zero.sub(&p).norm() < 1e-6);
    assert!(lim.range_limit_at_zero.sub(&x.sub(&p)).norm() < 1e-6);
}

#[test]
fn explicit_constants_match_closed_forms() {
    // Γ(1/2 + iy)Γ(1/2 − iy) = π / cosh(πy)
    assert!((c_alpha_n(C64::new(0.5, 1.0), 1) - std::f64::consts::PI.cosh()).abs() < 1e-12 * 11.6);
    // mpmath, 30 digits
    assert!((c_alpha_n(C64::new(1.5, 0.5), 2) - 1.774_257_117_466_456_8).abs() < 1e-12);
    assert!((moment_constant(C64::new(0.3, 0.0), 1, 2.0) - 3.257_484_471_970_114_5).abs() < 1e-12);
    let scheme = QuadratureScheme::default();
    assert!((t_integral(0.3, 0.7, 2.0, &scheme).unwrap() - 2.152_345_838_838_738).abs() < 1e-9);
    // α = 1/2 makes f(μ) = 1 + μ², so J_1 = ∫ μ^{−1/2}/(1 + μ²) dμ = π/√2 and the q = 1 bound is 2π
    let j = t_integral(0.5, 0.5, 1.0, &scheme).unwrap();
    assert!((j - std::f64::consts::PI / 2f64.sqrt()).abs() < 1e-10);
    let b = t_operator_bound(0.5, 0.5, 1.0, &scheme).unwrap().unwrap();
    assert!((b - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!(t_operator_bound(0.5, 0.5, 3.0, &scheme).unwrap().is_none());
}

#[test]
fn sequence_operator_is_linear_and_shift_covariant() {
    let a = [1.0, -0.5, 2.0];
    let b = [0.25, 0.0, 1.0];
    let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + 2.0 * y).collect();
    let ta = apply_t(0.3, 0.5, 0, &a);
    let tb = apply_t(0.3, 0.5, 0, &b);
    let ts = apply_t(0.3, 0.5, 0, &sum);
    for i in 0..ts.len() {
        assert!((ts[i] - ta[i] - 2.0 * tb[i]).abs() < 1e-14 * (1.0 + ts[i].abs()));
    }
    // shifting i by 2 with α = 1/2 shifts j by 1: the same values on a shifted window
    let shifted = apply_t(0.3, 0.5, 2, &a);
    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!((l2(&shifted) - l2(&ta)).abs() < 1e-13 * l2(&ta));
}
