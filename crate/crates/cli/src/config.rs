//! Run configuration: a single JSON file pins the dataset, splits, learner,
//! valuation settings, and workflow parameters. Defaults fill every absent
//! field, and the resolved form is echoed into the run manifest so a run can
//! be reproduced from its outputs alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use datavalue::dataset::Relation;
use datavalue::learners::{LearnerSpec, Metric};
use datavalue::valuation::Method;
use datavalue::workflows::EstimatorKind;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        group_column: Option<String>,
    },
    Synthetic {
        n: usize,
        dim: usize,
        relation: Relation,
        /// Assign this many contiguous groups to the training split.
        #[serde(default)]
        groups: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub eval: f64,
    pub heldout: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.5,
            eval: 0.25,
            heldout: 0.25,
        }
    }
}

impl SplitFractions {
    fn validate(&self) -> Result<(), String> {
        let parts = [self.train, self.eval, self.heldout];
        if parts.iter().any(|&p| p <= 0.0) {
            return Err("split fractions must all be positive".into());
        }
        let total: f64 = parts.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(format!("split fractions sum to {total} > 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapSettings {
    #[serde(default = "default_bootstrap_b")]
    pub b: usize,
    #[serde(default = "default_multiplier")]
    pub multiplier: f64,
}

fn default_bootstrap_b() -> usize {
    1000
}
fn default_multiplier() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationSettings {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_max_permutations")]
    pub max_permutations: usize,
    #[serde(default = "default_threshold")]
    pub convergence_threshold: f64,
    #[serde(default = "default_window")]
    pub convergence_window: usize,
    /// Fixed absolute truncation tolerance. Ignored when the bootstrap
    /// settings are present.
    #[serde(default)]
    pub truncation_tolerance: Option<f64>,
    /// Derive the truncation tolerance from the bootstrap spread of the
    /// full-data score.
    #[serde(default)]
    pub truncation_bootstrap: Option<BootstrapSettings>,
    /// One-pass learning rate for the gradient method; falls back to the
    /// grid search when absent.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_method() -> Method {
    Method::Tmc
}
fn default_max_permutations() -> usize {
    1000
}
fn default_threshold() -> f64 {
    0.05
}
fn default_window() -> usize {
    100
}
fn default_workers() -> usize {
    1
}

impl Default for ValuationSettings {
    fn default() -> Self {
        Self {
            method: default_method(),
            max_permutations: default_max_permutations(),
            convergence_threshold: default_threshold(),
            convergence_window: default_window(),
            truncation_tolerance: None,
            truncation_bootstrap: None,
            alpha: None,
            workers: default_workers(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowParams {
    #[serde(default = "default_fraction")]
    pub flip_fraction: f64,
    #[serde(default = "default_fraction")]
    pub noise_fraction: f64,
    #[serde(default = "default_sigmas")]
    pub noise_sigmas: Vec<f64>,
    /// Sources per curve step; defaults to max(1, n / 50).
    #[serde(default)]
    pub step: Option<usize>,
    #[serde(default = "default_removal_cap")]
    pub removal_cap: f64,
    #[serde(default = "default_removal_cap")]
    pub addition_cap: f64,
    /// Label contamination injected into the acquisition pool.
    #[serde(default = "default_contamination")]
    pub pool_flip_fraction: f64,
    /// Label contamination of the adaptation source data.
    #[serde(default = "default_contamination")]
    pub adapt_flip_fraction: f64,
    /// Inspection mark reported in the flip summary.
    #[serde(default = "default_inspect_fraction")]
    pub inspect_fraction: f64,
    #[serde(default)]
    pub estimator: EstimatorKind,
    #[serde(default = "default_grid")]
    pub grid: Vec<f64>,
    #[serde(default = "default_grid_passes")]
    pub grid_passes: usize,
}

fn default_fraction() -> f64 {
    0.1
}
fn default_sigmas() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}
fn default_removal_cap() -> f64 {
    0.5
}
fn default_contamination() -> f64 {
    0.3
}
fn default_inspect_fraction() -> f64 {
    0.3
}
fn default_grid() -> Vec<f64> {
    vec![0.005, 0.01, 0.05, 0.1, 0.5]
}
fn default_grid_passes() -> usize {
    8
}

impl Default for WorkflowParams {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields defaulted")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    #[serde(default)]
    pub split: SplitFractions,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default = "LearnerSpec::logistic")]
    pub learner: LearnerSpec,
    #[serde(default)]
    pub valuation: ValuationSettings,
    #[serde(default)]
    pub workflows: WorkflowParams,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_metric() -> Metric {
    Metric::Accuracy
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.split.validate().map_err(CliError::Config)?;
        self.learner
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.valuation.workers == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        if let Some(t) = self.valuation.truncation_tolerance {
            if t < 0.0 || t.is_nan() {
                return Err(CliError::Config("truncation_tolerance must be >= 0".into()));
            }
        }
        match &self.dataset {
            DatasetSource::Csv { path, .. } => {
                if !path.exists() {
                    return Err(CliError::Config(format!(
                        "csv file {} does not exist",
                        path.display()
                    )));
                }
            }
            DatasetSource::Synthetic { n, dim, groups, .. } => {
                if *n < 2 || *dim < 1 {
                    return Err(CliError::Config("synthetic needs n >= 2 and dim >= 1".into()));
                }
                if let Some(g) = groups {
                    if *g == 0 {
                        return Err(CliError::Config("groups must be >= 1".into()));
                    }
                }
            }
        }
        Ok(())
    }
}
