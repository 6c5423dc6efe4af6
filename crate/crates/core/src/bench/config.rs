use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::resampler::Resampler;
use crate::smc::LgssmParams;
use crate::testfn::TestFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Diagnose,
    Rate,
    PfVariance,
    PfOracle,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::Rate => "rate",
            ExperimentKind::PfVariance => "pf-variance",
            ExperimentKind::PfOracle => "pf-oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where the particle systems of `diagnose` and `rate` come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// One fixed system. States default to `0, 1, ..., N-1` when `dim = 1`.
    Explicit {
        weights: Vec<f64>,
        #[serde(default)]
        states: Option<Vec<f64>>,
        #[serde(default = "one")]
        dim: usize,
    },
    /// `count` random systems per size in `n_grid`: normal states, uniform weights.
    Random {
        #[serde(default = "one")]
        count: usize,
        #[serde(default = "one")]
        dim: usize,
    },
    /// Normal states weighted by a Gaussian likelihood centred at `(obs, ..., obs)`.
    GaussianLikelihood {
        #[serde(default = "one")]
        dim: usize,
        #[serde(default)]
        obs: f64,
        #[serde(default = "one")]
        count: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    #[default]
    Bootstrap,
    Guided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dim: usize,
    pub horizon: usize,
    pub alpha: f64,
    #[serde(default)]
    pub formalism: Formalism,
    /// Observation CSV (one row per step, `dim` columns); simulated from the seed when absent.
    #[serde(default)]
    pub observations: Option<PathBuf>,
    /// Run the auxiliary filter with the predictive auxiliary function.
    #[serde(default)]
    pub auxiliary: bool,
}

impl ModelSpec {
    pub fn params(&self) -> crate::Result<LgssmParams> {
        LgssmParams::new(self.dim, self.horizon, self.alpha)
    }
}

/// A single experiment, read from one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must agree with the subcommand.
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
    /// Label written to the `experiment` column; defaults to the kind name.
    #[serde(default)]
    pub id: Option<String>,
    pub seed: u64,
    pub schemes: Vec<Resampler>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub test_functions: Vec<TestFn>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

fn bad(path: &str, message: impl Into<String>) -> BenchError {
    BenchError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and reports the JSON path of the first offending field.
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            bad(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
        })
    }

    pub fn label(&self, kind: ExperimentKind) -> String {
        self.id.clone().unwrap_or_else(|| kind.name().to_string())
    }

    /// Checks everything `kind` needs before any work starts.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), BenchError> {
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(bad(
                    "experiment",
                    format!("config is for {}, not {}", k.name(), kind.name()),
                ));
            }
        }
        if self.replicates < 2 {
            return Err(bad("replicates", "at least 2 replicates are needed for standard errors"));
        }
        if self.schemes.is_empty() {
            return Err(bad("schemes", "at least one scheme is required"));
        }
        if let Some(i) = self.n_grid.iter().position(|&n| n == 0) {
            return Err(bad(&format!("n_grid[{i}]"), "particle counts must be >= 1"));
        }
        match kind {
            ExperimentKind::Diagnose => self.validate_system(false),
            ExperimentKind::Rate => {
                self.validate_system(true)?;
                if self.n_grid.len() < 4 {
                    return Err(bad("n_grid", "rate fits need at least 4 sizes"));
                }
                if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(bad("n_grid", "sizes must be strictly increasing"));
                }
                if self.test_functions.is_empty() {
                    return Err(bad("test_functions", "at least one test function is required"));
                }
                Ok(())
            }
            ExperimentKind::PfVariance | ExperimentKind::PfOracle => {
                let model = self
                    .model
                    .as_ref()
                    .ok_or_else(|| bad("model", "a model is required"))?;
                if model.dim == 0 {
                    return Err(bad("model.dim", "must be >= 1"));
                }
                if !(model.alpha.is_finite() && model.alpha.abs() < 1.0) {
                    return Err(bad("model.alpha", "must lie in (-1, 1)"));
                }
                if self.n_grid.is_empty() {
                    return Err(bad("n_grid", "at least one particle count is required"));
                }
                if self.system.is_some() {
                    return Err(bad("system", "not used by particle-filter experiments"));
                }
                Ok(())
            }
        }
    }

    fn validate_system(&self, for_rate: bool) -> Result<(), BenchError> {
        if self.model.is_some() {
            return Err(bad("model", "only used by particle-filter experiments"));
        }
        let system = self
            .system
            .as_ref()
            .ok_or_else(|| bad("system", "a particle system is required"))?;
        match system {
            SystemSpec::Explicit {
                weights,
                states,
                dim,
            } => {
                if for_rate {
                    return Err(bad("system.kind", "rate fits need a family of systems, not an explicit one"));
                }
                if weights.is_empty() {
                    return Err(bad("system.weights", "must not be empty"));
                }
                if *dim == 0 {
                    return Err(bad("system.dim", "must be >= 1"));
                }
                match states {
                    Some(s) if s.len() != weights.len() * dim => {
                        return Err(bad(
                            "system.states",
                            format!("expected {} values, got {}", weights.len() * dim, s.len()),
                        ))
                    }
                    None if *dim != 1 => {
                        return Err(bad("system.states", "required when dim > 1"))
                    }
                    _ => {}
                }
                if !(self.n_grid.is_empty() || self.n_grid == [weights.len()]) {
                    return Err(bad("n_grid", "must be empty or equal to the number of weights"));
                }
            }
            SystemSpec::Random { count, dim } | SystemSpec::GaussianLikelihood { count, dim, .. } => {
                if *count == 0 || (for_rate && *count != 1) {
                    let why = if for_rate { "rate fits use exactly one family" } else { "must be >= 1" };
                    return Err(bad("system.count", why));
                }
                if *dim == 0 {
                    return Err(bad("system.dim", "must be >= 1"));
                }
                if self.n_grid.is_empty() {
                    return Err(bad("n_grid", "at least one particle count is required"));
                }
            }
        }
        Ok(())
    }
}
