//! Numerical checks of the structural results over seeded operator ensembles.
//!
//! Every check is registered once in [`registry`]. A run draws its ensembles from one seed,
//! evaluates samples in parallel with results collected in draw order, and aggregates them into
//! an [`EquivalenceReport`]. Ratio checks are judged against a ceiling fixed beforehand by a
//! calibration pass on 4-dimensional diagonal operators with brute-force summation.

mod checks;
pub mod constants;
pub mod ensemble;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::besov::{BesovIndex, NormOptions};
use crate::error::{Error, Result};
pub use ensemble::{derive_seed, Draw, EnsembleSpec, OperatorFamily, VectorSampler};

/// Seed of the calibration pass; independent of the run seed so ceilings do not move with it.
pub const CALIBRATION_SEED: u64 = 0x0b35_0c41_1b7a_7e5d;
/// Cap on the failure entries kept per report.
pub const MAX_FAILURES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    RatioBounded,
    ExactInequality,
    ExactIdentity,
    Limit,
    GridVerification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegistryEntry {
    pub id: &'static str,
    pub paper_ref: &'static str,
    pub quote: &'static str,
    pub kind: CheckKind,
}

/// Every registered check, in suite order.
pub fn registry() -> impl Iterator<Item = &'static RegistryEntry> {
    checks::DEFS.iter().map(|d| &d.entry)
}

pub fn lookup(id: &str) -> Option<&'static RegistryEntry> {
    registry().find(|e| e.id == id)
}

pub fn registered_ids() -> Vec<&'static str> {
    registry().map(|e| e.id).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceProfile {
    /// Slack for exact inequalities, relative to the larger side.
    pub inequality: f64,
    /// Relative error allowed in exact identities.
    pub identity: f64,
    /// Relative error allowed in eigenvalue images.
    pub spectral: f64,
    /// Residual allowed for limits.
    pub limit: f64,
    /// Calibrated ceiling = observed spread × this factor.
    pub safety_factor: f64,
    /// Relative tail tolerance passed to the quasi-norm routines.
    pub tail_tolerance: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile { inequality: 1e-9, identity: 1e-9, spectral: 1e-12, limit: 1e-6, safety_factor: 10.0, tail_tolerance: 1e-8 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessConfig {
    pub seed: u64,
    /// Replaces the sample count of every default ensemble.
    pub count: Option<usize>,
    /// Replaces the default ensembles (their own seeds are used as given).
    pub ensembles: Option<Vec<EnsembleSpec>>,
    /// Replaces the default index grid of the checks that are parametrised by one.
    pub index_grid: Option<Vec<BesovIndex>>,
    pub tolerance: ToleranceProfile,
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(ens) = &self.ensembles {
            for e in ens {
                e.operator_family.validate()?;
                if e.count == 0 {
                    return Err(Error::Inadmissible("ensemble count must be positive".into()));
                }
            }
        }
        if self.count == Some(0) {
            return Err(Error::Inadmissible("count must be positive".into()));
        }
        let t = &self.tolerance;
        for (name, v) in [
            ("inequality", t.inequality),
            ("identity", t.identity),
            ("spectral", t.spectral),
            ("limit", t.limit),
            ("tail_tolerance", t.tail_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Inadmissible(format!("tolerance.{name} must be positive and finite, got {v}")));
            }
        }
        if !(t.safety_factor >= 1.0 && t.safety_factor.is_finite()) {
            return Err(Error::Inadmissible(format!("tolerance.safety_factor must be at least 1, got {}", t.safety_factor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub family: String,
    pub samples: usize,
    pub observed_spread: f64,
    pub safety_factor: f64,
    pub ceiling: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub group: String,
    pub count: usize,
    pub non_finite: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_median: f64,
    pub spread: f64,
    pub calibration: Option<Calibration>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    pub evaluations: usize,
    pub violations: usize,
    /// Largest finite deviation past the inequality, identity or limit (≤ 0 means satisfied).
    pub max_deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub parameters: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub check_id: String,
    pub paper_ref: String,
    pub quote: String,
    pub kind: CheckKind,
    pub samples: usize,
    pub ratio_stats: Vec<RatioStats>,
    pub violation_stats: Option<ViolationStats>,
    pub verdict: Verdict,
    pub failures: Vec<Failure>,
    pub config_hash: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Quasi-norms with certified tails.
    Certified,
    /// Plain summation over a fixed wide window of levels.
    BruteForce,
}

pub(crate) struct EvalCtx<'a> {
    pub mode: Mode,
    pub opts: NormOptions,
    pub tol: &'a ToleranceProfile,
    pub indices: Option<&'a [BesovIndex]>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Outcome {
    Ratio { group: String, value: f64 },
    Deviation { value: f64, tolerance: f64 },
    Degenerate(String),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Record {
    pub seed: u64,
    pub params: String,
    pub outcome: Outcome,
}

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn effective_ensembles(def: &checks::CheckDef, cfg: &HarnessConfig) -> Vec<EnsembleSpec> {
    if let Some(e) = &cfg.ensembles {
        return e.clone();
    }
    def.default_families()
        .into_iter()
        .enumerate()
        .map(|(i, f)| {
            EnsembleSpec::new(f.family, f.sampler, cfg.count.unwrap_or(f.count), derive_seed(cfg.seed, &format!("{}/{i}", def.entry.id)))
        })
        .collect()
}

fn evaluate(def: &checks::CheckDef, ctx: &EvalCtx, ensembles: &[EnsembleSpec], seed: u64) -> (usize, Vec<Record>) {
    match def.direct {
        Some(run) => {
            let recs = run(ctx, seed);
            (recs.len(), recs)
        }
        None => {
            let mut draws = 0;
            let mut out = Vec::new();
            for ens in ensembles {
                let seeds = ens.sample_seeds();
                draws += seeds.len();
                let label = ens.operator_family.to_string();
                let per: Vec<Vec<Record>> = seeds
                    .par_iter()
                    .map(|&s| match ens.draw(s) {
                        Ok(d) => (def.eval)(ctx, &d)
                            .into_iter()
                            .map(|(params, outcome)| Record { seed: s, params: format!("{label}; {params}"), outcome })
                            .collect(),
                        Err(e) => vec![Record { seed: s, params: label.clone(), outcome: outcome_of_error(e) }],
                    })
                    .collect();
                out.extend(per.into_iter().flatten());
            }
            (draws, out)
        }
    }
}

pub(crate) fn outcome_of_error(e: Error) -> Outcome {
    match e {
        Error::Inadmissible(m) => Outcome::Degenerate(m),
        other => Outcome::Error(other.to_string()),
    }
}

fn ratio_groups(records: &[Record]) -> BTreeMap<String, Vec<(f64, u64)>> {
    let mut groups: BTreeMap<String, Vec<(f64, u64)>> = BTreeMap::new();
    for r in records {
        if let Outcome::Ratio { group, value } = &r.outcome {
            groups.entry(group.clone()).or_default().push((*value, r.seed));
        }
    }
    groups
}

fn spread_of(values: &[(f64, u64)]) -> (f64, f64, f64, f64, usize) {
    let mut finite: Vec<f64> = values.iter().map(|v| v.0).filter(|v| v.is_finite() && *v > 0.0).collect();
    let bad = values.len() - finite.len();
    if finite.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, f64::NAN, bad);
    }
    finite.sort_by(f64::total_cmp);
    let min = finite[0];
    let max = finite[finite.len() - 1];
    let mid = finite.len() / 2;
    let median = if finite.len() % 2 == 1 { finite[mid] } else { 0.5 * (finite[mid - 1] + finite[mid]) };
    (min, max, median, max / min, bad)
}

/// Ceilings per ratio group from a brute-force pass over the check's calibration ensembles.
fn calibrate(def: &'static checks::CheckDef, cfg: &HarnessConfig) -> BTreeMap<String, Calibration> {
    let ctx = EvalCtx {
        mode: Mode::BruteForce,
        opts: NormOptions { tail_tolerance: cfg.tolerance.tail_tolerance, ..NormOptions::default() },
        tol: &cfg.tolerance,
        indices: cfg.index_grid.as_deref(),
    };
    let mut out = BTreeMap::new();
    for source in def.calibration_sources() {
        let ensembles: Vec<EnsembleSpec> = source
            .families
            .iter()
            .enumerate()
            .map(|(i, f)| {
                EnsembleSpec::new(
                    f.family.clone(),
                    f.sampler.clone(),
                    f.count,
                    derive_seed(CALIBRATION_SEED, &format!("{}/{i}", source.def.entry.id)),
                )
            })
            .collect();
        let label = if source.def.direct.is_some() {
            source.direct_label.to_string()
        } else {
            ensembles.iter().map(EnsembleSpec::label).collect::<Vec<_>>().join(" + ")
        };
        let (_, recs) = evaluate(source.def, &ctx, &ensembles, CALIBRATION_SEED);
        for (group, vals) in ratio_groups(&recs) {
            if !source.accepts(&group) {
                continue;
            }
            let (_, _, _, spread, bad) = spread_of(&vals);
            if bad > 0 || !spread.is_finite() {
                continue;
            }
            out.insert(
                group,
                Calibration {
                    family: label.clone(),
                    samples: vals.len(),
                    observed_spread: spread,
                    safety_factor: cfg.tolerance.safety_factor,
                    ceiling: spread * cfg.tolerance.safety_factor,
                    method: source.method.to_string(),
                },
            );
        }
    }
    out
}

fn config_hash(id: &str, ensembles: &[EnsembleSpec], cfg: &HarnessConfig) -> String {
    #[derive(Serialize)]
    struct Hashed<'a> {
        check_id: &'a str,
        ensembles: &'a [EnsembleSpec],
        index_grid: &'a Option<Vec<BesovIndex>>,
        tolerance: &'a ToleranceProfile,
        seed: u64,
    }
    let h = Hashed { check_id: id, ensembles, index_grid: &cfg.index_grid, tolerance: &cfg.tolerance, seed: cfg.seed };
    sha_hex(&serde_json::to_vec(&h).expect("config serializes"))
}

/// Runs one registered check.
pub fn run_check(id: &str, cfg: &HarnessConfig) -> Result<EquivalenceReport> {
    cfg.validate()?;
    let def = checks::definition(id)
        .ok_or_else(|| Error::Inadmissible(format!("unknown check id {id:?}; registered: {}", registered_ids().join(", "))))?;
    let ensembles = effective_ensembles(def, cfg);
    let ctx = EvalCtx {
        mode: Mode::Certified,
        opts: NormOptions { tail_tolerance: cfg.tolerance.tail_tolerance, ..NormOptions::default() },
        tol: &cfg.tolerance,
        indices: cfg.index_grid.as_deref(),
    };
    let (samples, records) = evaluate(def, &ctx, &ensembles, cfg.seed);
    let groups = ratio_groups(&records);
    let ceilings = if groups.is_empty() { BTreeMap::new() } else { calibrate(def, cfg) };

    let mut failures = Vec::new();
    let mut fail = false;
    let mut evaluable = 0usize;
    let push = |f: Failure, failures: &mut Vec<Failure>| {
        if failures.len() < MAX_FAILURES {
            failures.push(f);
        }
    };

    let mut ratio_stats = Vec::new();
    for (group, vals) in &groups {
        evaluable += vals.len();
        let (min, max, median, spread, bad) = spread_of(vals);
        let calibration = ceilings.get(group).cloned();
        if bad > 0 {
            fail = true;
            for (v, s) in vals.iter().filter(|v| !(v.0.is_finite() && v.0 > 0.0)) {
                push(
                    Failure { seed: *s, parameters: group.clone(), reason: format!("ratio {v} is not finite and positive") },
                    &mut failures,
                );
            }
        }
        match &calibration {
            None => {
                fail = true;
                push(
                    Failure { seed: cfg.seed, parameters: group.clone(), reason: "no calibrated ceiling for this group".into() },
                    &mut failures,
                );
            }
            Some(c) if !(spread <= c.ceiling) => {
                fail = true;
                let worst = vals.iter().filter(|v| v.0 == max || v.0 == min).map(|v| v.1).next().unwrap_or(cfg.seed);
                push(
                    Failure {
                        seed: worst,
                        parameters: group.clone(),
                        reason: format!("spread {spread} exceeds calibrated ceiling {}", c.ceiling),
                    },
                    &mut failures,
                );
            }
            _ => {}
        }
        ratio_stats.push(RatioStats {
            group: group.clone(),
            count: vals.len(),
            non_finite: bad,
            ratio_min: if min.is_finite() { min } else { 0.0 },
            ratio_max: if max.is_finite() { max } else { 0.0 },
            ratio_median: if median.is_finite() { median } else { 0.0 },
            spread: if spread.is_finite() { spread } else { 0.0 },
            calibration,
        });
    }

    let mut violation_stats: Option<ViolationStats> = None;
    for r in &records {
        match &r.outcome {
            Outcome::Deviation { value, tolerance } => {
                evaluable += 1;
                let vs = violation_stats.get_or_insert(ViolationStats {
                    evaluations: 0,
                    violations: 0,
                    max_deviation: f64::NEG_INFINITY,
                    tolerance: *tolerance,
                });
                vs.evaluations += 1;
                vs.tolerance = vs.tolerance.max(*tolerance);
                if value.is_finite() {
                    vs.max_deviation = vs.max_deviation.max(*value);
                }
                if !(*value <= *tolerance) {
                    vs.violations += 1;
                    fail = true;
                    push(
                        Failure {
                            seed: r.seed,
                            parameters: r.params.clone(),
                            reason: format!("deviation {value:e} exceeds {tolerance:e}"),
                        },
                        &mut failures,
                    );
                }
            }
            Outcome::Error(m) => {
                fail = true;
                push(Failure { seed: r.seed, parameters: r.params.clone(), reason: format!("error: {m}") }, &mut failures);
            }
            Outcome::Degenerate(m) => {
                push(Failure { seed: r.seed, parameters: r.params.clone(), reason: format!("degenerate: {m}") }, &mut failures);
            }
            Outcome::Ratio { .. } => {}
        }
    }
    if let Some(vs) = violation_stats.as_mut() {
        if !vs.max_deviation.is_finite() {
            vs.max_deviation = 0.0;
        }
    }

    let verdict = if fail {
        Verdict::Fail
    } else if evaluable == 0 {
        Verdict::Degenerate
    } else {
        Verdict::Pass
    };
    Ok(EquivalenceReport {
        check_id: def.entry.id.to_string(),
        paper_ref: def.entry.paper_ref.to_string(),
        quote: def.entry.quote.to_string(),
        kind: def.entry.kind,
        samples,
        ratio_stats,
        violation_stats,
        verdict,
        failures,
        config_hash: config_hash(id, &ensembles, cfg),
        seed: cfg.seed,
    })
}

/// Runs the given checks (parallel across ids) and returns the reports in suite order.
pub fn run_suite(ids: &[String], cfg: &HarnessConfig) -> Result<Vec<EquivalenceReport>> {
    cfg.validate()?;
    for id in ids {
        if lookup(id).is_none() {
            return Err(Error::Inadmissible(format!("unknown check id {id:?}; registered: {}", registered_ids().join(", "))));
        }
    }
    ids.par_iter().map(|id| run_check(id, cfg)).collect()
}

/// True when every report passed.
pub fn all_passed(reports: &[EquivalenceReport]) -> bool {
    reports.iter().all(|r| r.verdict == Verdict::Pass)
}
