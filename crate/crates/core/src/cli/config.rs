//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 7,
//!   "replicates": 3,
//!   "template": {"kind": "constant", "delta": 0.25,
//!                "groups": [{"size": 100, "rho": 0.7}, {"size": 50, "rho": 0.7}]},
//!   "noise": {"epsilon": 0.29, "dim": 25},
//!   "outputs": ["matrix", "validity"]
//! }
//! ```
//!
//! Unknown fields are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::{ComparisonArm, DEFAULT_BINS, DEFAULT_RANGE};
use crate::clustereval::DEFAULT_K_MAX;
use crate::error::Result;
use crate::noise::{AlphaDensity, NoiseBudget, NoiseSpec, VectorGenerator};
use crate::templates::{CorrelationTemplate, GroupSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub replicates: u64,
    #[serde(default)]
    pub template: Option<TemplateConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub budget: Option<BudgetConfig>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    /// Arms for `compare`; the six-arm study when absent.
    #[serde(default)]
    pub arms: Option<Vec<ComparisonArm>>,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default)]
    pub cluster: Option<ClusterConfig>,
}

fn one() -> u64 {
    1
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Matrix, OutputKind::Validity]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Matrix,
    Validity,
    DiffHistogram,
    Spectra,
    ClusterSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemplateConfig {
    Constant {
        groups: Vec<SizeRho>,
        #[serde(default)]
        delta: f64,
    },
    Toeplitz {
        groups: Vec<SizeRho>,
    },
    Hub {
        groups: Vec<HubGroup>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeRho {
    pub size: usize,
    pub rho: f64,
}

/// Give exactly one of `tau` (linear step) and `rho_min` (value at the last lag).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubGroup {
    pub size: usize,
    pub rho_max: f64,
    #[serde(default)]
    pub rho_min: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "unit_gamma")]
    pub gamma: f64,
}

fn unit_gamma() -> f64 {
    1.0
}

impl TemplateConfig {
    pub fn build(&self) -> std::result::Result<CorrelationTemplate, String> {
        let template = match self {
            TemplateConfig::Constant { groups, delta } => {
                let g: Vec<(usize, f64)> = groups.iter().map(|g| (g.size, g.rho)).collect();
                CorrelationTemplate::constant(&g, *delta)
            }
            TemplateConfig::Toeplitz { groups } => {
                let g: Vec<(usize, f64)> = groups.iter().map(|g| (g.size, g.rho)).collect();
                CorrelationTemplate::toeplitz(&g)
            }
            TemplateConfig::Hub { groups } => {
                let mut specs = Vec::with_capacity(groups.len());
                for (i, g) in groups.iter().enumerate() {
                    let spec = match (g.tau, g.rho_min) {
                        (Some(tau), None) if g.gamma == 1.0 => GroupSpec::hub(g.size, g.rho_max, tau),
                        (None, Some(lo)) => GroupSpec::hub_range(g.size, g.rho_max, lo, g.gamma),
                        (Some(_), None) => {
                            return Err(format!("hub group {}: gamma != 1 needs rho_min, not tau", i + 1))
                        }
                        _ => return Err(format!("hub group {}: give exactly one of tau and rho_min", i + 1)),
                    };
                    specs.push(spec);
                }
                CorrelationTemplate::new(specs, 0.0)
            }
        };
        template.map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Derived from the budget when absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub dim: usize,
    #[serde(default)]
    pub generator: GeneratorConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorConfig {
    #[default]
    SphereUniform,
    IidNormalized,
    AlphaAbsX,
    AlphaArcMinusCircle,
    AlphaBeta {
        a: f64,
        b: f64,
    },
}

impl GeneratorConfig {
    pub fn generator(&self) -> VectorGenerator {
        match *self {
            GeneratorConfig::SphereUniform => VectorGenerator::SphereUniform,
            GeneratorConfig::IidNormalized => VectorGenerator::IidNormalized,
            GeneratorConfig::AlphaAbsX => VectorGenerator::AlphaMixed(AlphaDensity::AbsX),
            GeneratorConfig::AlphaArcMinusCircle => VectorGenerator::AlphaMixed(AlphaDensity::ArcMinusCircle),
            GeneratorConfig::AlphaBeta { a, b } => {
                VectorGenerator::AlphaMixed(AlphaDensity::BetaSymmetric { a, b })
            }
        }
    }
}

impl NoiseConfig {
    pub fn spec(&self, epsilon: f64, seed: u64) -> Result<NoiseSpec> {
        Ok(NoiseSpec::new(epsilon, self.dim)?
            .with_generator(self.generator.generator())?
            .with_seed(seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub kappa_max: f64,
}

impl BudgetConfig {
    pub fn budget(&self) -> Result<NoiseBudget> {
        NoiseBudget::new(self.kappa_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// `[lo, hi]`; `null` spans `[-max_abs, max_abs]` of each arm.
    #[serde(default = "default_range")]
    pub range: Option<(f64, f64)>,
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

fn default_range() -> Option<(f64, f64)> {
    Some(DEFAULT_RANGE)
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            range: Some(DEFAULT_RANGE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    /// `hTC1` to `hTC6`, `iris`, or `custom` (template and noise from this file).
    pub scenario: String,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

/// Reads and version-checks a config file. Errors are plain messages; the
/// caller decides between I/O and configuration failures.
pub fn load(path: &Path) -> std::result::Result<ScenarioConfig, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(LoadError::Config)
}

pub fn parse(text: &str) -> std::result::Result<ScenarioConfig, String> {
    let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "config: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version
        ));
    }
    if config.replicates == 0 {
        return Err("config: replicates must be at least 1".into());
    }
    Ok(config)
}

#[derive(Debug)]
pub enum LoadError {
    Io(String),
    Config(String),
}
