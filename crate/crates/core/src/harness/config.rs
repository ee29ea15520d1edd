use std::path::{Path, PathBuf};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::ensembles::{CustomRadial, EnsembleSpec, RadialLaw};
use crate::error::{Error, Result};
use crate::spaces::{MatrixSpace, SpaceKind};
use crate::theory::parse_rational;

pub const SCHEMA_VERSION: u32 = 1;
pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Means,
    Covariance,
    Stein,
    Sweep,
    Distance,
    Tails,
}

/// Radial law as written in a config file: `"sphere"`, `"gauss"`, or
/// `{"custom": {"chi_dof": k}}` for `R² = χ²_k / k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadialConfig {
    Sphere,
    Gauss,
    Custom { chi_dof: f64 },
}

impl RadialConfig {
    pub fn to_law(&self) -> Result<RadialLaw> {
        Ok(match self {
            Self::Sphere => RadialLaw::FixedNorm,
            Self::Gauss => RadialLaw::GaussianCoords,
            Self::Custom { chi_dof } => RadialLaw::Custom(CustomRadial::chi(*chi_dof)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionConfig {
    /// `cos(θ·z)`; θ defaults to 0.5 in every coordinate.
    CosLinear { theta: Option<Vec<f64>> },
    QuadraticClipped { radius: f64 },
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_m() -> usize {
    8
}

fn default_radial() -> RadialConfig {
    RadialConfig::Gauss
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    pub space: SpaceKind,
    pub n: usize,
    #[serde(default = "default_radial")]
    pub radial: RadialConfig,
    #[serde(default = "default_m")]
    pub m: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep_sizes: Vec<usize>,
    /// Exact rational such as `"1/2"`.
    #[serde(default)]
    pub beta_factor: Option<String>,
    /// Model-error constant `C` of the `C/n` tolerance band.
    #[serde(default)]
    pub slack: Option<f64>,
    #[serde(default)]
    pub test_function: Option<TestFunctionConfig>,
    #[serde(default)]
    pub eps: Option<Vec<f64>>,
    /// Worker threads; 0 means one per core. Never affects results.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, space: SpaceKind, n: usize, m: usize, trials: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            space,
            n,
            radial: default_radial(),
            m,
            trials,
            seed: 0,
            sweep_sizes: Vec::new(),
            beta_factor: None,
            slack: None,
            test_function: None,
            eps: None,
            workers: 0,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "config schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.n < 2 {
            return Err(Error::Config(format!("n = {} must be ≥ 2", self.n)));
        }
        if self.m < 3 {
            return Err(Error::Config(format!("m = {} must be ≥ 3", self.m)));
        }
        if self.space == SpaceKind::AntisymmetricReal && (self.m < 4 || self.m % 2 == 1) {
            return Err(Error::Config(format!("asym_r needs even m ≥ 4, got {}", self.m)));
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("trials = {} must be ≥ {MIN_TRIALS}", self.trials)));
        }
        if self.sweep_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("sweep sizes must be strictly increasing".into()));
        }
        if self.sweep_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Config("sweep sizes must be ≥ 2".into()));
        }
        if self.experiment == ExperimentKind::Sweep && self.sweep_sizes.len() < 3 {
            return Err(Error::Config("a sweep needs at least 3 sizes".into()));
        }
        if self.experiment == ExperimentKind::Tails && self.radial != RadialConfig::Sphere {
            return Err(Error::Config("tail experiments use the fixed-norm (sphere) law only".into()));
        }
        if let Some(eps) = &self.eps {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                return Err(Error::Config("eps entries must lie in (0, 1)".into()));
            }
        }
        if let Some(s) = self.slack {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::Config(format!("slack {s} must be finite and ≥ 0")));
            }
        }
        if let Some(TestFunctionConfig::QuadraticClipped { radius }) = &self.test_function {
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::Config(format!("clipping radius {radius} must be positive")));
            }
        }
        self.beta()?;
        Ok(())
    }

    pub fn beta(&self) -> Result<Option<BigRational>> {
        self.beta_factor.as_deref().map(parse_rational).transpose()
    }

    pub fn ensemble(&self, n: usize, seed: u64) -> Result<EnsembleSpec> {
        EnsembleSpec::new(MatrixSpace::new(self.space, n)?, self.radial.to_law()?, seed)
    }

    /// Parses JSON; malformed or unknown fields and tags are schema errors,
    /// out-of-range values are config errors.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
