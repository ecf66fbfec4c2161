//! Command dispatch and artifact writing.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64 as C64;
use opbesov::besov::{
    breve_quasi_norm, continuous_quasi_norm, homog_quasi_norm, homog_semigroup_quasi_norm, inhom_quasi_norm, semigroup_quasi_norm,
    BesovIndex, NormResult,
};
use opbesov::fractional::{frac_power, frac_power_unified, frac_power_via_semigroup, spectral_frac_power, Evaluation};
use opbesov::harness::{run_suite, EquivalenceReport, Verdict};
use opbesov::interpolation::{interpolation_norm, CoupleSpec, KFunctional};
use opbesov::{Operator, QuadratureScheme, Vector};
use serde::{Deserialize, Serialize};

use crate::config::{Format, NormVariant, Plan, PowerRoute, Prepared};

/// What the process should report through its exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    ChecksFailed,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PowerOutput {
    pub command: String,
    pub alpha: [f64; 2],
    pub route: PowerRoute,
    pub value: Vec<[f64; 2]>,
    pub tail_bound: f64,
    pub nodes: usize,
    pub quadrature: QuadratureScheme,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NormOutput {
    pub command: String,
    pub norm: NormVariant,
    pub index: BesovIndex,
    pub theta: Option<f64>,
    pub result: NormResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KRow {
    pub t: f64,
    pub k: f64,
    /// Curve parameter of the minimizer (null when y = 0 is optimal).
    pub mu: Option<f64>,
    pub at_endpoint: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KfunOutput {
    pub command: String,
    pub alpha: [f64; 2],
    pub rows: Vec<KRow>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

/// Shortest round-trip decimal text.
fn num(v: f64) -> String {
    format!("{v}")
}

fn power(operator: &Operator, vector: &Vector, alpha: C64, route: PowerRoute, scheme: &QuadratureScheme) -> opbesov::Result<Evaluation> {
    let one = C64::new(1.0, 0.0);
    match route {
        PowerRoute::Spectral => Ok(Evaluation { value: spectral_frac_power(operator, alpha, vector)?, tail_bound: 0.0, nodes: 0 }),
        _ if alpha.re < 0.0 => {
            let inv = operator.inverse()?;
            power(&inv, vector, -alpha, route, scheme)
        }
        PowerRoute::Balakrishnan => frac_power(operator, alpha, vector, scheme),
        PowerRoute::Unified => frac_power_unified(operator, alpha, one, one, vector, scheme),
        PowerRoute::Semigroup => frac_power_via_semigroup(operator, alpha, one, vector, scheme),
    }
}

fn norm(
    operator: &Operator,
    vector: &Vector,
    variant: NormVariant,
    i: &BesovIndex,
    theta: Option<f64>,
    opts: &opbesov::besov::NormOptions,
) -> opbesov::Result<NormResult> {
    match variant {
        NormVariant::Inhomogeneous => inhom_quasi_norm(operator, i, vector, opts),
        NormVariant::Homogeneous => homog_quasi_norm(operator, i, vector, opts),
        NormVariant::Breve => breve_quasi_norm(operator, i, vector, opts),
        NormVariant::Continuous => continuous_quasi_norm(operator, i, vector, opts),
        NormVariant::Semigroup => semigroup_quasi_norm(operator, i.s, i.q, i.k, i.beta, vector, opts),
        NormVariant::HomogeneousSemigroup => homog_semigroup_quasi_norm(operator, i.s, i.q, i.beta, vector, opts),
        NormVariant::Interpolation => {
            let couple = CoupleSpec::new(operator, i.alpha, theta.expect("validated"), i.q)?;
            interpolation_norm(&couple, vector, &opts.scheme)
        }
    }
}

/// Reads a file holding either one report or a list of them.
pub fn read_reports(path: &Path) -> Result<Vec<EquivalenceReport>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<EquivalenceReport>),
        One(Box<EquivalenceReport>),
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read report {}", path.display()))?;
    let parsed: OneOrMany = serde_json::from_str(&text).with_context(|| format!("{} is not a report file", path.display()))?;
    Ok(match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(r) => vec![*r],
    })
}

fn reports_csv(reports: &[EquivalenceReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "check_id",
        "kind",
        "verdict",
        "samples",
        "group",
        "count",
        "ratio_min",
        "ratio_max",
        "ratio_median",
        "spread",
        "ceiling",
        "evaluations",
        "violations",
        "max_deviation",
        "tolerance",
    ])?;
    for r in reports {
        let kind = serde_json::to_value(r.kind)?.as_str().unwrap_or_default().to_string();
        let verdict = serde_json::to_value(r.verdict)?.as_str().unwrap_or_default().to_string();
        let head = [r.check_id.clone(), kind, verdict, r.samples.to_string()];
        for g in &r.ratio_stats {
            let ceiling = g.calibration.as_ref().map(|c| num(c.ceiling)).unwrap_or_default();
            let mut row: Vec<String> = head.to_vec();
            row.extend([
                g.group.clone(),
                g.count.to_string(),
                num(g.ratio_min),
                num(g.ratio_max),
                num(g.ratio_median),
                num(g.spread),
                ceiling,
            ]);
            row.extend([String::new(), String::new(), String::new(), String::new()]);
            w.write_record(&row)?;
        }
        if let Some(v) = &r.violation_stats {
            let mut row: Vec<String> = head.to_vec();
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.extend([v.evaluations.to_string(), v.violations.to_string(), num(v.max_deviation), num(v.tolerance)]);
            w.write_record(&row)?;
        }
        if r.ratio_stats.is_empty() && r.violation_stats.is_none() {
            let mut row: Vec<String> = head.to_vec();
            row.extend(std::iter::repeat_n(String::new(), 11));
            w.write_record(&row)?;
        }
    }
    Ok(w.into_inner()?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn status_of(reports: &[EquivalenceReport]) -> Status {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        Status::ChecksFailed
    } else {
        Status::Success
    }
}

pub fn execute(plan: &Plan) -> Result<Status> {
    let out = plan.output.as_deref();
    let csv_mode = plan.format == Format::Csv;
    match &plan.prepared {
        Prepared::Power { operator, vector, alpha, route, scheme } => {
            let ev = power(operator, vector, *alpha, *route, scheme)?;
            let bytes = if csv_mode {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["index", "re", "im"])?;
                for (i, v) in ev.value.values.iter().enumerate() {
                    w.write_record([i.to_string(), num(v.re), num(v.im)])?;
                }
                w.into_inner()?
            } else {
                json(&PowerOutput {
                    command: "power".into(),
                    alpha: pair(*alpha),
                    route: *route,
                    value: ev.value.values.iter().map(|v| pair(*v)).collect(),
                    tail_bound: ev.tail_bound,
                    nodes: ev.nodes,
                    quadrature: *scheme,
                })?
            };
            emit(out, &bytes)?;
            Ok(Status::Success)
        }
        Prepared::Norm { operator, vector, variant, index, theta, opts } => {
            let r = norm(operator, vector, *variant, index, *theta, opts)?;
            let bytes = if csv_mode {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["value", "tail_bound", "j_lo", "j_hi"])?;
                w.write_record([num(r.value), num(r.tail_bound), r.j_range_used.0.to_string(), r.j_range_used.1.to_string()])?;
                w.into_inner()?
            } else {
                json(&NormOutput { command: "norm".into(), norm: *variant, index: *index, theta: *theta, result: r })?
            };
            emit(out, &bytes)?;
            Ok(Status::Success)
        }
        Prepared::Kfun { operator, vector, alpha, grid } => {
            // θ and q do not enter K(t, x); any admissible pair builds the couple
            let couple = CoupleSpec::new(operator, *alpha, 0.5, 2.0)?;
            let kf = KFunctional::new(&couple, vector)?;
            let rows: Vec<KRow> = grid
                .iter()
                .map(|&t| {
                    let k = kf.value(t);
                    KRow { t, k: k.value, mu: k.mu, at_endpoint: k.at_endpoint }
                })
                .collect();
            let bytes = if csv_mode {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["t", "k", "mu", "at_endpoint"])?;
                for r in &rows {
                    w.write_record([num(r.t), num(r.k), r.mu.map(num).unwrap_or_default(), r.at_endpoint.to_string()])?;
                }
                w.into_inner()?
            } else {
                json(&KfunOutput { command: "kfun".into(), alpha: pair(*alpha), rows })?
            };
            emit(out, &bytes)?;
            Ok(Status::Success)
        }
        Prepared::Verify { suite, harness } => {
            let reports = run_suite(suite, harness)?;
            emit(out, &if csv_mode { reports_csv(&reports)? } else { json(&reports)? })?;
            Ok(status_of(&reports))
        }
        Prepared::Report { inputs } => {
            let mut merged = Vec::new();
            for p in inputs {
                merged.extend(read_reports(p)?);
            }
            emit(out, &if csv_mode { reports_csv(&merged)? } else { json(&merged)? })?;
            Ok(status_of(&merged))
        }
    }
}
