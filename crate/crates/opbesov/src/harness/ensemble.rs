//! Seeded operator and vector ensembles.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::vector::Vector;

/// Rejection threshold on the estimated M_A of the non-normal family.
pub const NONNORMAL_MAX_M: f64 = 50.0;
const NONNORMAL_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorFamily {
    /// Diagonal with eigenvalues log-uniform in [λ_min, λ_max].
    DiagLoguniform {
        n: usize,
        lambda_min: f64,
        lambda_max: f64,
    },
    /// Q diag(μ) Qᴴ with Haar-like Q and μ log-uniform in [c^{−1/2}, c^{1/2}].
    DenseSpd {
        n: usize,
        condition: f64,
    },
    /// The periodic second-difference Laplacian on an n-point grid of [0, 1).
    TorusLaplacian {
        n: usize,
    },
    /// Upper triangular, diagonal log-uniform in [1/4, 4], strict upper part coupling·N(0, 1);
    /// redrawn until the estimated M_A is at most 50.
    NonnormalUpper {
        n: usize,
        coupling: f64,
    },
    Shifted {
        base: Box<OperatorFamily>,
        epsilon: f64,
    },
}

impl fmt::Display for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorFamily::DiagLoguniform { n, lambda_min, lambda_max } => write!(f, "diag_loguniform({n}, {lambda_min}, {lambda_max})"),
            OperatorFamily::DenseSpd { n, condition } => write!(f, "dense_spd({n}, {condition})"),
            OperatorFamily::TorusLaplacian { n } => write!(f, "torus_laplacian({n})"),
            OperatorFamily::NonnormalUpper { n, coupling } => write!(f, "nonnormal_upper({n}, {coupling})"),
            OperatorFamily::Shifted { base, epsilon } => write!(f, "shifted({base}, {epsilon})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorSampler {
    /// Independent real N(0, 1) coordinates.
    Gaussian,
    /// A single eigenvector (a coordinate vector when there is no eigenbasis).
    EigenDirections,
    /// Complex Gaussian coefficients on the lowest `fraction` of the spectrum.
    BandLimited { fraction: f64 },
}

impl fmt::Display for VectorSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorSampler::Gaussian => write!(f, "gaussian"),
            VectorSampler::EigenDirections => write!(f, "eigen_directions"),
            VectorSampler::BandLimited { fraction } => write!(f, "band_limited({fraction})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub operator_family: OperatorFamily,
    pub vector_sampler: VectorSampler,
    pub count: usize,
    pub seed: u64,
}

/// One member of an ensemble.
#[derive(Debug, Clone)]
pub struct Draw {
    pub seed: u64,
    pub operator: Operator,
    pub vector: Vector,
}

/// Deterministic sub-seed for a labelled stream.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

fn loguniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

impl OperatorFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Inadmissible(m));
        match self {
            OperatorFamily::DiagLoguniform { n, lambda_min, lambda_max } => {
                if *n == 0 || !(*lambda_min > 0.0 && lambda_max >= lambda_min && lambda_max.is_finite()) {
                    return bad(format!("diag_loguniform needs n ≥ 1 and 0 < λ_min ≤ λ_max, got {self}"));
                }
            }
            OperatorFamily::DenseSpd { n, condition } => {
                if *n == 0 || !(*condition >= 1.0 && condition.is_finite()) {
                    return bad(format!("dense_spd needs n ≥ 1 and condition ≥ 1, got {self}"));
                }
            }
            OperatorFamily::TorusLaplacian { n } => {
                if *n < 2 {
                    return bad(format!("torus_laplacian needs n ≥ 2, got {n}"));
                }
            }
            OperatorFamily::NonnormalUpper { n, coupling } => {
                if *n == 0 || !(*coupling >= 0.0 && coupling.is_finite()) {
                    return bad(format!("nonnormal_upper needs n ≥ 1 and coupling ≥ 0, got {self}"));
                }
            }
            OperatorFamily::Shifted { base, epsilon } => {
                if !(*epsilon >= 0.0 && epsilon.is_finite()) {
                    return bad(format!("shift must be non-negative, got {epsilon}"));
                }
                base.validate()?;
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Operator> {
        match self {
            OperatorFamily::DiagLoguniform { n, lambda_min, lambda_max } => {
                let d: Vec<f64> = (0..*n).map(|_| loguniform(rng, *lambda_min, *lambda_max)).collect();
                Operator::diagonal(&d)
            }
            OperatorFamily::DenseSpd { n, condition } => {
                let g = DMatrix::from_fn(*n, *n, |_, _| C64::new(normal(rng), 0.0));
                let q = g.qr().q();
                let half = condition.sqrt();
                let mu = DVector::from_fn(*n, |_, _| C64::new(loguniform(rng, 1.0 / half, half), 0.0));
                let m = &q * DMatrix::from_diagonal(&mu) * q.adjoint();
                // symmetrize away rounding so the Hermitian eigensolver is used
                Operator::dense((&m + m.adjoint()) * C64::new(0.5, 0.0))
            }
            OperatorFamily::TorusLaplacian { n } => Operator::torus_laplacian(*n, 1),
            OperatorFamily::NonnormalUpper { n, coupling } => {
                for _ in 0..NONNORMAL_ATTEMPTS {
                    let m = DMatrix::from_fn(*n, *n, |i, j| {
                        if i == j {
                            C64::new(loguniform(rng, 0.25, 4.0), 0.0)
                        } else if j > i {
                            C64::new(coupling * normal(rng), 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        }
                    });
                    let op = Operator::dense(m)?;
                    if op.constants().m_a <= NONNORMAL_MAX_M {
                        return Ok(op);
                    }
                }
                Err(Error::Inadmissible(format!("{self}: no draw with M_A ≤ {NONNORMAL_MAX_M} in {NONNORMAL_ATTEMPTS} attempts")))
            }
            OperatorFamily::Shifted { base, epsilon } => base.sample(rng)?.shifted(*epsilon),
        }
    }
}

impl VectorSampler {
    pub fn sample(&self, a: &Operator, rng: &mut ChaCha8Rng) -> Vector {
        let n = a.dim();
        match self {
            VectorSampler::Gaussian => Vector::new(DVector::from_fn(n, |_, _| C64::new(normal(rng), 0.0))),
            VectorSampler::EigenDirections => {
                let i = rng.gen_range(0..n);
                match a.spectral() {
                    Some(sp) => {
                        let mut e = DVector::zeros(n);
                        e[i] = C64::new(1.0, 0.0);
                        Vector::new(sp.from_eigen(&e))
                    }
                    None => Vector::basis(n, i),
                }
            }
            VectorSampler::BandLimited { fraction } => match a.spectral() {
                Some(sp) => {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.sort_by(|&p, &q| sp.eigenvalues[p].total_cmp(&sp.eigenvalues[q]).then(p.cmp(&q)));
                    let keep = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).clamp(1, n);
                    let mut c = DVector::zeros(n);
                    for &i in &order[..keep] {
                        c[i] = C64::new(normal(rng), normal(rng));
                    }
                    Vector::new(sp.from_eigen(&c))
                }
                None => VectorSampler::Gaussian.sample(a, rng),
            },
        }
    }
}

impl EnsembleSpec {
    pub fn new(operator_family: OperatorFamily, vector_sampler: VectorSampler, count: usize, seed: u64) -> Self {
        EnsembleSpec { operator_family, vector_sampler, count, seed }
    }

    /// Per-sample seeds, drawn in order from the ensemble seed.
    pub fn sample_seeds(&self) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count).map(|_| rng.next_u64()).collect()
    }

    /// The member generated from one sample seed.
    pub fn draw(&self, sample_seed: u64) -> Result<Draw> {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let operator = self.operator_family.sample(&mut rng)?;
        let vector = self.vector_sampler.sample(&operator, &mut rng);
        Ok(Draw { seed: sample_seed, operator, vector })
    }

    pub fn label(&self) -> String {
        format!("{} × {} [{}]", self.operator_family, self.count, self.vector_sampler)
    }
}
