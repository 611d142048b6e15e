//! JSON scenario files. One scenario per file; unknown keys are rejected.

use std::path::Path;
use std::sync::Arc;

use dirac_core::dual::Dual;
use dirac_core::models::{KlauderModel, LatticeMaxwell, Potential, RelativisticParticle};
use dirac_core::{ChartSpec, ConstraintSet, IntegratorConfig, Projection, ScalarField};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Number of sample points for `brackets`.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub integrator: Option<IntegratorSpec>,
    #[serde(default)]
    pub quantum: Option<QuantumConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelConfig {
    Klauder {
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        k: KSpec,
        #[serde(default = "one")]
        hbar: f64,
        #[serde(default)]
        potential: Option<Potential>,
    },
    Particle {
        mass: f64,
        #[serde(default = "three")]
        spatial_dim: usize,
    },
    Maxwell {
        side: usize,
        #[serde(default = "one")]
        spacing: f64,
    },
    Custom {
        positions: Vec<String>,
        momenta: Vec<String>,
        #[serde(default)]
        hamiltonian: Option<Polynomial>,
        #[serde(default)]
        constraints: Vec<NamedPolynomial>,
        /// Sampling box `[−range, range)` for every coordinate.
        #[serde(default = "five")]
        range: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

fn five() -> f64 {
    5.0
}

/// `k` is either a constant or a ramp `[k0, k1]` meaning `k(t) = k0 + k1 t`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Constant(f64),
    Ramp([f64; 2]),
}

impl Default for KSpec {
    fn default() -> Self {
        KSpec::Constant(0.0)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// `Σ coeff · Π z_i^{powers_i}` over the chart coordinates.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPolynomial {
    pub name: String,
    pub terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum FlowKindConfig {
    Dirac,
    Poisson,
    Gauge,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: FlowKindConfig,
    /// Gauge multiplier `λ`.
    #[serde(default = "one")]
    pub multiplier: f64,
    pub initial: InitialState,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    /// Raw chart coordinates.
    Coords { values: Vec<f64> },
    /// Klauder surface point `(r*, φ, p_r*, p_φ)`.
    Reduced { phi: f64, p_phi: f64 },
    /// Particle on shell at `x^0 = t0` with contravariant spatial momentum.
    Particle { x: Vec<f64>, p: Vec<f64> },
    /// Lattice eigenmode `A = η cos(k·x + …)`, `E = 0`.
    Mode { n: [i64; 3], eta: [f64; 3] },
    /// Random transverse `A` and `E` from the scenario seed.
    Random,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub t0: f64,
    /// Newton projection back to the surface after each Dirac step.
    #[serde(default)]
    pub project: Option<ProjectSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSpec {
    pub tol: f64,
    #[serde(default = "ten")]
    pub max_iter: usize,
}

fn ten() -> usize {
    10
}

impl IntegratorSpec {
    pub fn build(&self) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::new(self.dt, self.steps).starting_at(self.t0);
        if let Some(p) = &self.project {
            cfg = cfg.with_projection(Projection::PostStepNewton {
                tol: p.tol,
                max_iter: p.max_iter,
            });
        }
        cfg
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    pub m_max: usize,
    /// `[m, re, im]` triples; the state is normalized before use.
    pub coeffs: Vec<(i64, f64, f64)>,
    pub times: TimeGrid,
    #[serde(default)]
    pub quadrature_intervals: Option<usize>,
}

/// `count` equally spaced times from `start` to `stop` inclusive.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if self.count == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(CliError::Config(format!("invalid time grid {self:?}")));
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.start + i as f64 * h).collect())
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<String>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid scenario: {e}")))
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        self.integrator
            .as_ref()
            .map(IntegratorSpec::build)
            .ok_or_else(|| CliError::Config("scenario has no `integrator` block".into()))
    }
}

pub fn klauder(alpha: f64, k: &KSpec, hbar: f64, potential: &Option<Potential>) -> Result<KlauderModel, CliError> {
    let model = match k {
        KSpec::Constant(k) => KlauderModel::new(alpha, *k)?,
        KSpec::Ramp([k0, k1]) => KlauderModel::new(alpha, *k0)?.with_ramp(*k1)?,
    };
    let model = model.with_hbar(hbar)?;
    Ok(match potential {
        Some(u) => model.with_potential(u.clone())?,
        None => model,
    })
}

pub fn particle(mass: f64, spatial_dim: usize) -> Result<RelativisticParticle, CliError> {
    Ok(RelativisticParticle::new(mass, spatial_dim)?)
}

pub fn maxwell(side: usize, spacing: f64) -> Result<LatticeMaxwell, CliError> {
    Ok(LatticeMaxwell::new(side, spacing)?)
}

/// A user-specified polynomial system.
pub struct CustomSystem {
    pub chart: Arc<ChartSpec>,
    pub hamiltonian: Option<ScalarField>,
    pub constraints: ConstraintSet,
}

pub fn custom(
    positions: &[String],
    momenta: &[String],
    hamiltonian: &Option<Polynomial>,
    constraints: &[NamedPolynomial],
) -> Result<CustomSystem, CliError> {
    let chart = Arc::new(ChartSpec::new(positions, momenta)?);
    let hamiltonian = match hamiltonian {
        Some(p) => Some(polynomial_field(&chart, "H", &p.terms)?),
        None => None,
    };
    let fields = constraints
        .iter()
        .map(|c| polynomial_field(&chart, &c.name, &c.terms))
        .collect::<Result<Vec<_>, _>>()?;
    let constraints = if fields.is_empty() {
        ConstraintSet::empty(&chart)
    } else {
        ConstraintSet::new(&chart, fields)?
    };
    Ok(CustomSystem {
        chart,
        hamiltonian,
        constraints,
    })
}

fn polynomial_field(chart: &Arc<ChartSpec>, name: &str, terms: &[Term]) -> Result<ScalarField, CliError> {
    let dim = chart.dim();
    for t in terms {
        if t.powers.len() != dim {
            return Err(CliError::Config(format!(
                "term of `{name}` has {} powers, chart has {dim} coordinates",
                t.powers.len()
            )));
        }
        if !t.coeff.is_finite() {
            return Err(CliError::Config(format!("non-finite coefficient in `{name}`")));
        }
    }
    let terms: Vec<(f64, Vec<i32>)> = terms
        .iter()
        .map(|t| (t.coeff, t.powers.iter().map(|&p| p as i32).collect()))
        .collect();
    Ok(ScalarField::from_dual(chart, name, move |z| {
        terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .fold(Dual::constant(*c), |acc, (i, &k)| acc * z[i].powi(k))
            })
            .sum()
    }))
}
