//! Run configuration: one JSON document, unknown keys rejected, admissibility checked before
//! anything is computed.

use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use opbesov::besov::BesovIndex;
use opbesov::harness::{self, EnsembleSpec, HarnessConfig, ToleranceProfile};
use opbesov::opspec::build_operator;
use opbesov::{Operator, QuadratureScheme, Vector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("command `{command}` needs key `{key}`")]
    Missing { command: &'static str, key: &'static str },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Power,
    Norm,
    Kfun,
    Verify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Power => "power",
            Command::Norm => "norm",
            Command::Kfun => "kfun",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerRoute {
    /// Balakrishnan–Komatsu integral (through A^{−1} for Re α < 0).
    Balakrishnan,
    /// The unified representation with α = β = 1.
    Unified,
    /// Through the semigroup e^{−tA}.
    Semigroup,
    /// Eigen-multipliers; needs spectral data.
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVariant {
    Inhomogeneous,
    Homogeneous,
    Breve,
    Continuous,
    Semigroup,
    HomogeneousSemigroup,
    Interpolation,
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> C64 {
        match self {
            Scalar::Real(r) => C64::new(r, 0.0),
            Scalar::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// q as a number or the string "inf".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Number(f64),
    Text(String),
}

impl QValue {
    fn value(&self) -> Result<f64, ConfigError> {
        match self {
            QValue::Number(v) => Ok(*v),
            QValue::Text(t) => match t.as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => Err(invalid("q", format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Suite {
    /// `"all"` or a comma-separated list.
    Text(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    /// Operator description, e.g. `"diagonal [1, 4]"` or `"shifted(torus_laplacian n=16, 1)"`.
    pub operator: Option<String>,
    pub vector: Option<Vec<Scalar>>,
    pub alpha: Option<Scalar>,
    pub beta: Option<Scalar>,
    pub s: Option<f64>,
    pub q: Option<QValue>,
    pub k: Option<i32>,
    pub theta: Option<f64>,
    pub norm: Option<NormVariant>,
    pub route: Option<PowerRoute>,
    pub t_grid: Option<TGrid>,
    pub trace: Option<bool>,
    pub tail_tolerance: Option<f64>,
    pub quadrature: Option<QuadratureScheme>,
    pub suite: Option<Suite>,
    pub count: Option<usize>,
    pub ensembles: Option<Vec<EnsembleSpec>>,
    pub index_grid: Option<Vec<BesovIndex>>,
    pub tolerance: Option<ToleranceProfile>,
    /// Report files to merge.
    pub inputs: Option<Vec<PathBuf>>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Reads a config from a file path, or from the text itself when it starts with `{`.
pub fn parse_config(source: &str) -> Result<RunConfig, ConfigError> {
    let text = if source.trim_start().starts_with('{') {
        source.to_string()
    } else {
        std::fs::read_to_string(Path::new(source)).map_err(|e| ConfigError::Io { path: source.to_string(), message: e.to_string() })?
    };
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<RunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Everything a command needs, built and checked.
#[derive(Debug, Clone)]
pub enum Prepared {
    Power {
        operator: Operator,
        vector: Vector,
        alpha: C64,
        route: PowerRoute,
        scheme: QuadratureScheme,
    },
    Norm {
        operator: Operator,
        vector: Vector,
        variant: NormVariant,
        index: BesovIndex,
        theta: Option<f64>,
        opts: opbesov::besov::NormOptions,
    },
    Kfun {
        operator: Operator,
        vector: Vector,
        alpha: C64,
        grid: Vec<f64>,
    },
    Verify {
        suite: Vec<String>,
        harness: HarnessConfig,
    },
    Report {
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub prepared: Prepared,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn need<T: Clone>(v: &Option<T>, command: Command, key: &'static str) -> Result<T, ConfigError> {
    v.clone().ok_or(ConfigError::Missing { command: command.name(), key })
}

fn finite(key: &'static str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

pub fn parse_suite(s: &Suite) -> Result<Vec<String>, ConfigError> {
    let ids: Vec<String> = match s {
        Suite::Text(t) if t.trim() == "all" => return Ok(harness::registered_ids().into_iter().map(String::from).collect()),
        Suite::Text(t) => t.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
        Suite::List(v) => v.clone(),
    };
    for id in &ids {
        if harness::lookup(id).is_none() {
            return Err(invalid("suite", format!("unknown check id {id:?}; registered: {}", harness::registered_ids().join(", "))));
        }
    }
    Ok(ids)
}

impl RunConfig {
    fn operator_and_vector(&self, command: Command) -> Result<(Operator, Vector), ConfigError> {
        let spec = need(&self.operator, command, "operator")?;
        let operator = build_operator(&spec).map_err(|e| invalid("operator", e.to_string()))?;
        let entries = need(&self.vector, command, "vector")?;
        let values: Vec<C64> = entries.iter().map(|s| s.value()).collect();
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("vector", "entries must be finite"));
        }
        if values.len() != operator.dim() {
            return Err(invalid("vector", format!("has {} entries but the operator acts on dimension {}", values.len(), operator.dim())));
        }
        Ok((operator, Vector::from_complex(&values)))
    }

    fn scheme(&self) -> Result<QuadratureScheme, ConfigError> {
        let scheme = self.quadrature.unwrap_or_default();
        scheme.validate().map_err(|e| invalid("quadrature", e.to_string()))?;
        Ok(scheme)
    }

    /// Validates admissibility and builds the inputs of the command.
    pub fn plan(&self) -> Result<Plan, ConfigError> {
        let command = self.command.ok_or(invalid("command", "missing; expected one of power, norm, kfun, verify, report"))?;
        let scheme = self.scheme()?;
        let prepared = match command {
            Command::Power => {
                let (operator, vector) = self.operator_and_vector(command)?;
                let alpha = need(&self.alpha, command, "alpha")?.value();
                finite("alpha", alpha.re)?;
                finite("alpha", alpha.im)?;
                if alpha.re == 0.0 && alpha.im != 0.0 {
                    return Err(invalid("alpha", "purely imaginary exponents are not supported"));
                }
                Prepared::Power { operator, vector, alpha, route: self.route.unwrap_or(PowerRoute::Balakrishnan), scheme }
            }
            Command::Norm => {
                let (operator, vector) = self.operator_and_vector(command)?;
                let variant = self.norm.unwrap_or(NormVariant::Inhomogeneous);
                let s = finite("s", need(&self.s, command, "s")?)?;
                let q = need(&self.q, command, "q")?.value()?;
                let alpha = self.alpha.map_or(C64::new(1.0, 0.0), Scalar::value);
                let beta = self.beta.map_or(C64::new(1.0, 0.0), Scalar::value);
                let index = BesovIndex { s, q, k: self.k.unwrap_or(0), alpha, beta };
                let theta = self.theta;
                match variant {
                    NormVariant::Interpolation => {
                        let th = need(&self.theta, command, "theta")?;
                        if !(th > 0.0 && th < 1.0) {
                            return Err(invalid("theta", format!("θ must lie in (0, 1), got {th}")));
                        }
                        if !(alpha.re > 0.0) || !(q > 0.0) {
                            return Err(invalid("alpha", format!("the couple needs Re α > 0 and q > 0 (α = {alpha}, q = {q})")));
                        }
                    }
                    NormVariant::Semigroup | NormVariant::HomogeneousSemigroup => {
                        if !(q > 0.0) {
                            return Err(invalid("q", format!("q must lie in (0, ∞], got {q}")));
                        }
                        if !(s > 0.0 && s < beta.re) {
                            return Err(invalid("s", format!("semigroup norms need 0 < s < Re β (s = {s}, β = {beta})")));
                        }
                    }
                    NormVariant::Homogeneous | NormVariant::Breve => {
                        index.validate_homogeneous().map_err(|e| invalid("s", e.to_string()))?;
                    }
                    NormVariant::Inhomogeneous | NormVariant::Continuous => {
                        index.validate().map_err(|e| invalid("s", e.to_string()))?;
                    }
                }
                let tail = self.tail_tolerance.unwrap_or(opbesov::besov::NormOptions::default().tail_tolerance);
                if !(tail > 0.0 && tail < 1.0) {
                    return Err(invalid("tail_tolerance", format!("must lie in (0, 1), got {tail}")));
                }
                let opts = opbesov::besov::NormOptions { tail_tolerance: tail, scheme, trace: self.trace.unwrap_or(false) };
                Prepared::Norm { operator, vector, variant, index, theta, opts }
            }
            Command::Kfun => {
                let (operator, vector) = self.operator_and_vector(command)?;
                let alpha = self.alpha.map_or(C64::new(1.0, 0.0), Scalar::value);
                if !(alpha.re > 0.0) {
                    return Err(invalid("alpha", format!("the couple needs Re α > 0, got {alpha}")));
                }
                let g = self.t_grid.unwrap_or(TGrid { lo: 1e-3, hi: 1e3, count: 25 });
                if !(g.lo > 0.0 && g.hi >= g.lo && g.hi.is_finite() && g.count >= 1) {
                    return Err(invalid("t_grid", format!("needs 0 < lo ≤ hi < ∞ and count ≥ 1, got {g:?}")));
                }
                Prepared::Kfun { operator, vector, alpha, grid: opbesov::operator::log_grid(g.lo, g.hi, g.count) }
            }
            Command::Verify => {
                let suite = parse_suite(self.suite.as_ref().unwrap_or(&Suite::Text("all".into())))?;
                let harness = HarnessConfig {
                    seed: self.seed.unwrap_or(0),
                    count: self.count,
                    ensembles: self.ensembles.clone(),
                    index_grid: self.index_grid.clone(),
                    tolerance: self.tolerance.clone().unwrap_or_default(),
                };
                harness.validate().map_err(|e| invalid("tolerance", e.to_string()))?;
                if let Some(grid) = &harness.index_grid {
                    for i in grid {
                        if !(i.q > 0.0) || !i.s.is_finite() {
                            return Err(invalid("index_grid", format!("entry {i:?} has no valid (s, q)")));
                        }
                    }
                }
                Prepared::Verify { suite, harness }
            }
            Command::Report => {
                let inputs = need(&self.inputs, command, "inputs")?;
                if inputs.is_empty() {
                    return Err(invalid("inputs", "at least one report file is needed"));
                }
                Prepared::Report { inputs }
            }
        };
        Ok(Plan { command, prepared, output: self.output.clone(), format: self.format.unwrap_or(Format::Json) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_power_config() {
        let c = parse_config_text(r#"{"command": "power", "operator": "diagonal [1, 4]", "vector": [1, 1], "alpha": 0.5}"#).unwrap();
        assert_eq!(c.command, Some(Command::Power));
        let plan = c.plan().unwrap();
        assert!(matches!(plan.prepared, Prepared::Power { route: PowerRoute::Balakrishnan, .. }));
        assert_eq!(plan.format, Format::Json);
    }

    #[test]
    fn complex_scalars_and_infinite_q() {
        let c = parse_config_text(
            r#"{"command": "norm", "operator": "diagonal [1, 4]", "vector": [[1, 0], [0, 1]], "s": 0.5, "q": "inf", "alpha": [0.5, 0.25]}"#,
        )
        .unwrap();
        let Prepared::Norm { index, vector, .. } = c.plan().unwrap().prepared else { panic!() };
        assert!(index.q.is_infinite());
        assert_eq!(index.alpha, C64::new(0.5, 0.25));
        assert_eq!(vector.values[1], C64::new(0.0, 1.0));
    }

    #[test]
    fn admissibility_names_the_constraint() {
        let c = parse_config_text(r#"{"command": "norm", "operator": "diagonal [1]", "vector": [1], "s": 2, "q": 2, "beta": 1}"#).unwrap();
        let e = c.plan().unwrap_err().to_string();
        assert!(e.contains("s must satisfy −Re α < s < Re β"), "{e}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = parse_config_text(r#"{"command": "power", "gamma_mode": 1}"#).unwrap_err();
        assert!(matches!(e, ConfigError::Parse { .. }));
        assert!(e.to_string().contains("gamma_mode"));
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse_config_text("{\n  \"command\": \"power\",\n  oops\n}").unwrap_err();
        let ConfigError::Parse { line, .. } = e else { panic!() };
        assert_eq!(line, 3);
    }

    #[test]
    fn dimension_and_suite_checks() {
        let c = parse_config_text(r#"{"command": "power", "operator": "diagonal [1, 4]", "vector": [1], "alpha": 0.5}"#).unwrap();
        assert!(c.plan().unwrap_err().to_string().contains("dimension 2"));
        assert!(parse_suite(&Suite::Text("embed_q, nope".into())).is_err());
        assert_eq!(parse_suite(&Suite::Text("embed_q,cos_estimate".into())).unwrap().len(), 2);
        assert_eq!(parse_suite(&Suite::Text("all".into())).unwrap().len(), harness::registered_ids().len());
    }
}
