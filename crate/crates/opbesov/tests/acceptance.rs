//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use opbesov::fractional::{
    euler_integral, frac_power, frac_power_unified, frac_power_via_semigroup, reproducing_residual, resolvent_scalar_integral,
    spectral_frac_power,
};
use opbesov::harness::{registered_ids, run_suite, EquivalenceReport, HarnessConfig, OperatorFamily, VectorSampler, Verdict};
use opbesov::{QuadratureScheme, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATIO_SUITES: [&str; 14] = [
    "k_independence",
    "alpha_independence",
    "full_independence",
    "homog_independence",
    "continuity_equiv",
    "translation",
    "lifting_pos",
    "lifting_equiv",
    "reiteration",
    "interpolation",
    "semigroup_norm",
    "homog_semigroup_norm",
    "subordinated_norm",
    "classical_torus",
];

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: String) -> Outcome {
    Outcome { ok: true, detail }
}

fn fail(detail: String) -> Outcome {
    Outcome { ok: false, detail }
}

fn within(o: Outcome, took: Duration, limit: Duration) -> Outcome {
    if took > limit {
        fail(format!("{}; took {:.1?} (limit {:?})", o.detail, took, limit))
    } else {
        Outcome { ok: o.ok, detail: format!("{}; {:.2?}", o.detail, took) }
    }
}

fn rel(a: &Vector, b: &Vector) -> f64 {
    (&a.values - &b.values).norm() / b.values.norm().max(1e-300)
}

fn gamma_anchors() -> Outcome {
    let sch = QuadratureScheme::default();
    let mut worst_euler = 0f64;
    for alpha in [0.25, 0.5, 0.75, 1.5] {
        for n in [2, 3] {
            match euler_integral(alpha, n, &sch) {
                Ok(v) => worst_euler = worst_euler.max((v - 1.0).abs()),
                Err(e) => return fail(format!("euler α={alpha} n={n}: {e}")),
            }
        }
    }
    let mut worst_res = 0f64;
    for alpha in [0.25, 0.5, 0.75] {
        for lambda in [0.1, 1.0, 10.0] {
            match resolvent_scalar_integral(alpha, lambda, &sch) {
                Ok(v) => worst_res = worst_res.max((v - 1.0).abs()),
                Err(e) => return fail(format!("resolvent α={alpha} λ={lambda}: {e}")),
            }
        }
    }
    let detail = format!("max |euler − 1| = {worst_euler:.2e} (≤ 1e-8), max |resolvent − 1| = {worst_res:.2e} (≤ 1e-6)");
    if worst_euler <= 1e-8 && worst_res <= 1e-6 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn draw_exponent(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let re = rng.gen_range(0.0..2.5);
        let im = if rng.gen_bool(0.5) { rng.gen_range(-1.5..1.5) } else { 0.0 };
        let z = C64::new(re, im);
        let integer_re = re == re.round();
        if re > 0.0 && !(integer_re && im != 0.0) {
            return z;
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let sch = QuadratureScheme::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0f64; 3];
    for i in 0..100 {
        let n = rng.gen_range(2..=32);
        let family = OperatorFamily::DenseSpd { n, condition: 1e3 };
        let a = match family.sample(&mut rng) {
            Ok(a) => a,
            Err(e) => return fail(format!("sample {i}: {e}")),
        };
        let x = VectorSampler::Gaussian.sample(&a, &mut rng);
        let z = draw_exponent(&mut rng);
        let exact = spectral_frac_power(&a, z, &x).expect("spectral route on an SPD operator");
        let next = C64::new(z.re.floor() + 1.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let routes =
            [frac_power(&a, z, &x, &sch), frac_power_unified(&a, z, one, next, &x, &sch), frac_power_via_semigroup(&a, z, next, &x, &sch)];
        for (k, r) in routes.into_iter().enumerate() {
            match r {
                Ok(ev) => worst[k] = worst[k].max(rel(&ev.value, &exact)),
                Err(e) => return fail(format!("sample {i} route {k} at α = {z}: {e}")),
            }
        }
    }
    let detail = format!("max rel err balakrishnan {:.2e}, unified {:.2e}, semigroup {:.2e} (≤ 1e-6)", worst[0], worst[1], worst[2]);
    if worst.iter().all(|w| *w <= 1e-6) {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn reproducing() -> Outcome {
    let sch = QuadratureScheme::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut calderon, mut ab) = (0f64, 0f64);
    for i in 0..50 {
        let n = rng.gen_range(2..=16);
        let family = if i % 2 == 0 {
            OperatorFamily::DiagLoguniform { n, lambda_min: 0.01, lambda_max: 100.0 }
        } else {
            OperatorFamily::DenseSpd { n, condition: 1e3 }
        };
        let a = family.sample(&mut rng).expect("invertible sample");
        let x = VectorSampler::Gaussian.sample(&a, &mut rng);
        let alpha = C64::new(rng.gen_range(0.1..2.5), if rng.gen_bool(0.5) { rng.gen_range(-1.0..1.0) } else { 0.0 });
        let m = rng.gen_range(1..=3);
        let cut = 10f64.powf(rng.gen_range(-1.0..1.0));
        match reproducing_residual(&a, alpha, m, cut, &x, &sch) {
            Ok(r) => calderon = calderon.max(r),
            Err(e) => return fail(format!("sample {i}: {e}")),
        }
        match reproducing_residual(&a, alpha, m, 0.0, &x, &sch) {
            Ok(r) => ab = ab.max(r),
            Err(e) => return fail(format!("sample {i}: {e}")),
        }
    }
    let detail = format!("max residual inhomogeneous {calderon:.2e}, homogeneous {ab:.2e} (≤ 1e-6)");
    if calderon <= 1e-6 && ab <= 1e-6 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn find<'a>(reports: &'a [EquivalenceReport], id: &str) -> &'a EquivalenceReport {
    reports.iter().find(|r| r.check_id == id).unwrap_or_else(|| panic!("{id} missing from the full suite"))
}

/// Every listed check passes with zero violations at `tol` and a deviation no larger than `tol`.
fn exact_suites(reports: &[EquivalenceReport], ids: &[&str], tol: f64) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for id in ids {
        let r = find(reports, id);
        match &r.violation_stats {
            Some(v) => {
                let good = r.verdict == Verdict::Pass && v.violations == 0 && v.tolerance <= tol && v.max_deviation <= tol;
                ok &= good;
                parts.push(format!("{id}: {} evals, max dev {:.1e}", v.evaluations, v.max_deviation));
            }
            None => {
                ok = false;
                parts.push(format!("{id}: no violation statistics"));
            }
        }
    }
    Outcome { ok, detail: parts.join("; ") }
}

fn ratio_suites(reports: &[EquivalenceReport]) -> Outcome {
    let mut groups = 0;
    let mut worst = 0f64;
    let mut bad = Vec::new();
    for id in RATIO_SUITES {
        let r = find(reports, id);
        if r.verdict != Verdict::Pass {
            bad.push(format!("{id} verdict {:?}", r.verdict));
        }
        for g in &r.ratio_stats {
            groups += 1;
            let finite = g.non_finite == 0 && g.ratio_min.is_finite() && g.ratio_max.is_finite() && g.ratio_min > 0.0;
            match &g.calibration {
                Some(c) if finite && g.spread <= c.ceiling && !c.family.is_empty() => worst = worst.max(g.spread / c.ceiling),
                Some(c) => bad.push(format!("{id} [{}]: spread {} vs ceiling {}", g.group, g.spread, c.ceiling)),
                None => bad.push(format!("{id} [{}]: no calibration", g.group)),
            }
        }
    }
    if bad.is_empty() {
        pass(format!("{groups} ratio groups within calibrated ceilings, largest spread/ceiling {worst:.3}"))
    } else {
        fail(bad.join("; "))
    }
}

fn classical_torus(reports: &[EquivalenceReport]) -> Outcome {
    let r = find(reports, "classical_torus");
    let fourier: Vec<_> = r.ratio_stats.iter().filter(|g| g.group.starts_with("fourier ")).collect();
    let sqrt: Vec<_> = r.ratio_stats.iter().filter(|g| g.group.starts_with("alpha=0.5 ")).collect();
    let samples = fourier.iter().map(|g| g.count).min().unwrap_or(0);
    let detail = format!(
        "{} Littlewood–Paley groups (≥ {samples} vectors each), {} square-root reiteration groups, verdict {:?}",
        fourier.len(),
        sqrt.len(),
        r.verdict
    );
    if r.verdict == Verdict::Pass && !fourier.is_empty() && !sqrt.is_empty() && samples >= 100 {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn cos_estimate(reports: &[EquivalenceReport], alone: Duration) -> Outcome {
    let o = exact_suites(reports, &["cos_estimate"], 1e-9);
    within(o, alone, Duration::from_secs(10))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();

    let t = Instant::now();
    let o = gamma_anchors();
    results.push((1, "gamma-integral anchors", within(o, t.elapsed(), Duration::from_secs(5))));

    let t = Instant::now();
    let o = oracle_equivalence();
    results.push((2, "quadrature routes vs spectral oracle", within(o, t.elapsed(), Duration::from_secs(60))));

    results.push((3, "reproducing formulas", reproducing()));

    let cfg = HarnessConfig::default();
    let t = Instant::now();
    let cos_alone = run_suite(&["cos_estimate".to_string()], &cfg).expect("cos_estimate runs");
    let cos_time = t.elapsed();

    let all: Vec<String> = registered_ids().into_iter().map(String::from).collect();
    let t = Instant::now();
    let first = run_suite(&all, &cfg).expect("full suite runs");
    let full_time = t.elapsed();
    let second = run_suite(&all, &cfg).expect("full suite runs");

    results.push((
        4,
        "exact inequality suites",
        exact_suites(&first, &["embed_q", "embed_s", "uniform_bounds", "moment", "semigroup_property", "resolvent_identity"], 1e-9),
    ));
    results.push((5, "cos estimate grid", cos_estimate(&cos_alone, cos_time)));
    let ident = exact_suites(&first, &["inverse_breve", "inverse_homog"], 1e-9);
    let spec = exact_suites(&first, &["spectral_map"], 1e-12);
    results.push((6, "exact identities", Outcome { ok: ident.ok && spec.ok, detail: format!("{}; {}", ident.detail, spec.detail) }));
    let failing: Vec<&str> = first.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| r.check_id.as_str()).collect();
    let ratio = ratio_suites(&first);
    let ratio = if failing.is_empty() { ratio } else { fail(format!("{}; failing checks: {}", ratio.detail, failing.join(", "))) };
    results.push((7, "equivalence-ratio suites, full suite", within(ratio, full_time, Duration::from_secs(300))));
    results.push((8, "classical recovery on the torus", classical_torus(&first)));
    let a = serde_json::to_string_pretty(&first).expect("reports serialize");
    let b = serde_json::to_string_pretty(&second).expect("reports serialize");
    let det = if a == b {
        pass(format!("{} reports, {} bytes, identical", first.len(), a.len()))
    } else {
        fail("full-suite JSON differs between runs".into())
    };
    results.push((9, "determinism", det));

    let mut failed = 0;
    for (n, name, o) in &results {
        println!("{} criterion {n} ({name}): {}", if o.ok { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.ok);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", results.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", results.len());
}
