//! Experiment configuration files.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use rnm::fieldops::{TestFunction, VectorField};
use rnm::potential::Potential;
use rnm::sampler::ChainConfig;
use rnm::stats::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Droplet,
    KernelCheck,
    Sample,
    Fluctuations,
    Ward,
    Clt,
    DnField,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Droplet => "droplet",
            ExperimentKind::KernelCheck => "kernel-check",
            ExperimentKind::Sample => "sample",
            ExperimentKind::Fluctuations => "fluctuations",
            ExperimentKind::Ward => "ward",
            ExperimentKind::Clt => "clt",
            ExperimentKind::DnField => "dn-field",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Dpp,
    Mcmc,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    /// Number of DPP draws. MCMC output size is fixed by the chain.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub chain: Option<ChainConfig>,
}

fn default_samples() -> usize {
    1000
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec { kind: SamplerKind::Dpp, samples: default_samples(), chain: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_trace")]
    pub trace: f64,
    #[serde(default = "default_ward")]
    pub ward: f64,
}

fn default_trace() -> f64 {
    1e-6
}

fn default_ward() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { trace: default_trace(), ward: default_ward() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrature {
    #[serde(default = "default_ward_nodes")]
    pub ward_radial: usize,
    #[serde(default = "default_ward_nodes")]
    pub ward_angular: usize,
}

fn default_ward_nodes() -> usize {
    48
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { ward_radial: 48, ward_angular: 48 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedFunction {
    pub id: String,
    pub f: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedField {
    pub id: String,
    pub v: Value,
}

/// The raw file contents. Unknown keys are rejected.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    pub potential: Value,
    pub n: Vec<usize>,
    #[serde(default)]
    pub sampler: Option<SamplerSpec>,
    #[serde(default)]
    pub test_functions: Vec<NamedFunction>,
    #[serde(default)]
    pub perturbation: Option<Value>,
    #[serde(default)]
    pub fields: Vec<NamedField>,
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default)]
    pub decomposition: bool,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub quadrature: Quadrature,
}

fn default_method() -> Method {
    Method::Kernel
}

fn default_bins() -> usize {
    30
}

/// A configuration with every expression parsed and every invariant checked.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub kind: ExperimentKind,
    pub potential: Potential,
    pub n: Vec<usize>,
    pub sampler: SamplerSpec,
    pub test_functions: Vec<(String, TestFunction)>,
    pub perturbation: Option<TestFunction>,
    pub fields: Vec<(String, VectorField)>,
    pub points: Vec<Complex64>,
    pub method: Method,
    pub decomposition: bool,
    pub histogram_bins: usize,
    pub output: PathBuf,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub quadrature: Quadrature,
}

/// Parses and validates a configuration. `kind` is the subcommand, if any;
/// it must agree with the file's `experiment` key when both are present.
pub fn parse_config(text: &str, kind: Option<ExperimentKind>) -> Result<Experiment, String> {
    let raw: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let kind = match (kind, raw.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(format!("subcommand '{}' does not match experiment '{}' in the config", a.name(), b.name()))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err("missing 'experiment' (required by 'run')".into()),
    };
    if raw.n.is_empty() {
        return Err("'n' must be a non-empty list".into());
    }
    if let Some(bad) = raw.n.iter().find(|&&n| n < 1) {
        return Err(format!("every n must be at least 1 (got {bad})"));
    }
    let potential = Potential::from_json(&raw.potential).map_err(|e| format!("potential: {e}"))?;
    let mut test_functions = Vec::new();
    for nf in &raw.test_functions {
        let f = TestFunction::from_json(&nf.f).map_err(|e| format!("test function '{}': {e}", nf.id))?;
        test_functions.push((nf.id.clone(), f));
    }
    let perturbation = match &raw.perturbation {
        Some(v) => Some(TestFunction::from_json(v).map_err(|e| format!("perturbation: {e}"))?),
        None => None,
    };
    let mut fields = Vec::new();
    for nf in &raw.fields {
        let v = VectorField::from_json(&nf.v).map_err(|e| format!("field '{}': {e}", nf.id))?;
        fields.push((nf.id.clone(), v));
    }
    let sampler = raw.sampler.unwrap_or_default();
    if sampler.kind == SamplerKind::Mcmc {
        let chain = sampler.chain.as_ref().ok_or("an mcmc sampler needs a 'chain' block")?;
        chain.validate().map_err(|e| format!("chain: {e}"))?;
    }
    if !raw.points.iter().flatten().all(|v| v.is_finite()) {
        return Err("'points' must be finite".into());
    }
    if raw.histogram_bins == 0 {
        return Err("'histogram_bins' must be positive".into());
    }
    Ok(Experiment {
        kind,
        potential,
        n: raw.n,
        sampler,
        test_functions,
        perturbation,
        fields,
        points: raw.points.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        method: raw.method,
        decomposition: raw.decomposition,
        histogram_bins: raw.histogram_bins,
        output: raw.output.unwrap_or_else(|| PathBuf::from("rnm-out")),
        seed: raw.seed,
        tolerances: raw.tolerances,
        quadrature: raw.quadrature,
    })
}
