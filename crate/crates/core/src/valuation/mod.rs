//! Per-source valuation: exact Shapley values, Monte Carlo permutation
//! estimates with optional truncation, gradient-based one-pass estimates,
//! group valuation, and the leave-one-out baseline.
//!
//! Values use the 1/n normalization, so the combinatorial form coincides with
//! the expectation over uniformly random permutations and per-source values
//! sum to V(D) - V(empty).

mod engine;
mod exact;
mod gshapley;
mod loo;
mod score;

pub use engine::{has_converged, PermutationRecord};
pub use exact::{exact_shapley_game, EXACT_MAX_PLAYERS};
pub use gshapley::INIT_SIGMA as GSHAPLEY_INIT_SIGMA;
pub use loo::loo_values_game;
pub use score::{GroupScore, LearnerScore, SubsetScore};

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SourceSet};
use crate::error::{Error, Result};
use crate::learners::{fit, Evaluator, LearnerSpec, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Mc,
    Tmc,
    Gshapley,
    Loo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Mc => "mc",
            Method::Tmc => "tmc",
            Method::Gshapley => "gshapley",
            Method::Loo => "loo",
        }
    }
}

/// Estimation settings shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationConfig {
    pub method: Method,
    /// Iteration budget for the permutation estimators.
    #[serde(default = "default_max_permutations")]
    pub max_permutations: usize,
    #[serde(default = "default_threshold")]
    pub convergence_threshold: f64,
    #[serde(default = "default_window")]
    pub convergence_window: usize,
    /// Absolute score tolerance for per-permutation truncation; 0 disables.
    #[serde(default)]
    pub truncation_tolerance: f64,
    /// One-pass learning rate, gshapley only.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
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

impl Default for ValuationConfig {
    fn default() -> Self {
        Self {
            method: Method::Tmc,
            max_permutations: default_max_permutations(),
            convergence_threshold: default_threshold(),
            convergence_window: default_window(),
            truncation_tolerance: 0.0,
            alpha: None,
            seed: 0,
            workers: default_workers(),
        }
    }
}

impl ValuationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        if self.convergence_threshold.is_nan() || self.convergence_threshold <= 0.0 {
            return Err(Error::InvalidArgument(
                "convergence_threshold must be > 0".into(),
            ));
        }
        if self.convergence_window == 0 {
            return Err(Error::InvalidArgument(
                "convergence_window must be >= 1".into(),
            ));
        }
        match self.method {
            Method::Mc | Method::Tmc | Method::Gshapley => {
                if self.max_permutations == 0 {
                    return Err(Error::InvalidArgument(
                        "max_permutations must be >= 1".into(),
                    ));
                }
            }
            Method::Exact | Method::Loo => {}
        }
        if self.truncation_tolerance.is_nan() || self.truncation_tolerance < 0.0 {
            return Err(Error::InvalidArgument(
                "truncation_tolerance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-source values with run diagnostics. Serialized as
/// `{method, seed, n, values, permutations_used, converged, v_full, v_null}`;
/// the per-window history ships separately as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationResult {
    pub method: Method,
    pub seed: u64,
    pub n: usize,
    pub values: Vec<f64>,
    pub permutations_used: usize,
    pub converged: bool,
    pub v_full: f64,
    pub v_null: f64,
    /// Running values at the end of each convergence window.
    #[serde(skip)]
    pub history: Vec<(usize, Vec<f64>)>,
}

/// Reported after each convergence window by the permutation engines.
#[derive(Debug, Clone, Copy)]
pub struct WindowProgress {
    pub iteration: usize,
    pub converged: bool,
}

/// Rayon pool with a fixed thread count; 0 means the library default.
pub(crate) fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))
}

/// Monte Carlo or truncated Monte Carlo over an injected score function.
pub fn permutation_shapley_game(
    game: &dyn SubsetScore,
    cfg: &ValuationConfig,
) -> Result<ValuationResult> {
    permutation_shapley_game_internal(game, cfg, false, None).map(|(result, _)| result)
}

fn permutation_shapley_game_internal(
    game: &dyn SubsetScore,
    cfg: &ValuationConfig,
    keep_records: bool,
    progress: Option<&mut dyn FnMut(WindowProgress)>,
) -> Result<(ValuationResult, Vec<PermutationRecord>)> {
    cfg.validate()?;
    let n = game.players();
    if n == 0 {
        return Err(Error::InvalidArgument("game has no players".into()));
    }
    let all: Vec<usize> = (0..n).collect();
    let v_null = game.score(&[]);
    let v_full = game.score(&all);
    let tolerance = match cfg.method {
        Method::Tmc => cfg.truncation_tolerance,
        _ => 0.0,
    };
    let out = engine::run_windows(
        n,
        cfg,
        |t| engine::scan_permutation(game, t, cfg.seed, tolerance, v_null, v_full),
        keep_records,
        progress,
    )?;
    let result = ValuationResult {
        method: cfg.method,
        seed: cfg.seed,
        n,
        values: out.values,
        permutations_used: out.permutations_used,
        converged: out.converged,
        v_full,
        v_null,
        history: out.history,
    };
    Ok((result, out.records))
}

fn learner_score<'a>(
    spec: &'a LearnerSpec,
    train: &'a Dataset,
    ev: &'a Evaluator,
) -> Result<LearnerScore<'a>> {
    LearnerScore::new(spec, train, ev)
}

/// Exact Shapley values of every training point, all 2^n coalitions scored
/// once. Requires n <= 20 and a deterministic learner (checked by fitting the
/// full set twice).
pub fn exact_shapley(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
) -> Result<ValuationResult> {
    check_deterministic(spec, train)?;
    let game = learner_score(spec, train, ev)?;
    exact_shapley_game(&game, 0)
}

fn check_deterministic(spec: &LearnerSpec, train: &Dataset) -> Result<()> {
    let full = SourceSet::full(train.len());
    let a = fit(spec, train, &full, None)?;
    let b = fit(spec, train, &full, None)?;
    if a != b {
        return Err(Error::NondeterministicLearner);
    }
    Ok(())
}

/// Monte Carlo permutation estimate without truncation.
pub fn mc_shapley(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<ValuationResult> {
    let cfg = ValuationConfig {
        method: Method::Mc,
        truncation_tolerance: 0.0,
        ..cfg.clone()
    };
    let game = learner_score(spec, train, ev)?;
    permutation_shapley_game(&game, &cfg)
}

/// Truncated Monte Carlo: within each permutation scan, once the running
/// prefix score is within the tolerance of V(D), the remaining marginals are
/// zero and no further fits occur.
pub fn tmc_shapley(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<ValuationResult> {
    let cfg = ValuationConfig {
        method: Method::Tmc,
        ..cfg.clone()
    };
    let game = learner_score(spec, train, ev)?;
    permutation_shapley_game(&game, &cfg)
}

#[cfg(test)]
pub(crate) fn tmc_shapley_with_records(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<(ValuationResult, Vec<PermutationRecord>)> {
    let cfg = ValuationConfig {
        method: Method::Tmc,
        ..cfg.clone()
    };
    let game = learner_score(spec, train, ev)?;
    permutation_shapley_game_internal(&game, &cfg, true, None)
}

/// Gradient-based one-pass estimate (differentiable learners only).
pub fn g_shapley(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<ValuationResult> {
    let cfg = ValuationConfig {
        method: Method::Gshapley,
        ..cfg.clone()
    };
    cfg.validate()?;
    let alpha = gshapley::require_gshapley_alpha(spec, &cfg)?;
    let game = gshapley::LogisticGradientGame { train, ev, alpha };
    let out = gshapley::run_gradient_engine(&game, &cfg, None)?;
    // Diagnostics come from the ordinary fit path.
    let score = learner_score(spec, train, ev)?;
    let all: Vec<usize> = (0..train.len()).collect();
    Ok(ValuationResult {
        method: Method::Gshapley,
        seed: cfg.seed,
        n: train.len(),
        values: out.values,
        permutations_used: out.permutations_used,
        converged: out.converged,
        v_full: score.score(&all),
        v_null: score.score(&[]),
        history: out.history,
    })
}

/// Group valuation: players are whole groups, permutation prefixes are unions
/// of member points. Methods: exact (G <= 20), mc, tmc.
pub fn group_shapley(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<ValuationResult> {
    let members = train.group_members()?;
    let base = learner_score(spec, train, ev)?;
    let game = GroupScore::new(&base, members);
    match cfg.method {
        Method::Exact => {
            let mut result = exact_shapley_game(&game, cfg.workers)?;
            result.seed = cfg.seed;
            Ok(result)
        }
        Method::Mc | Method::Tmc => permutation_shapley_game(&game, cfg),
        Method::Gshapley | Method::Loo => Err(Error::InvalidArgument(format!(
            "group valuation does not support method '{}'",
            cfg.method.name()
        ))),
    }
}

/// Leave-one-out baseline: phi_i = V(D) - V(D - {i}), n + 1 fits.
pub fn loo_values(train: &Dataset, spec: &LearnerSpec, ev: &Evaluator) -> Result<ValuationResult> {
    let game = learner_score(spec, train, ev)?;
    loo_values_game(&game, 0)
}

/// Dispatch on `cfg.method`, reporting each convergence window to `progress`.
/// Uses group players when the dataset carries groups and the method supports
/// them.
pub fn compute_values(
    train: &Dataset,
    spec: &LearnerSpec,
    ev: &Evaluator,
    cfg: &ValuationConfig,
    progress: Option<&mut dyn FnMut(WindowProgress)>,
) -> Result<ValuationResult> {
    cfg.validate()?;
    match cfg.method {
        Method::Exact => {
            if train.groups().is_some() {
                return group_shapley(train, spec, ev, cfg);
            }
            check_deterministic(spec, train)?;
            let game = learner_score(spec, train, ev)?;
            let mut result = exact_shapley_game(&game, cfg.workers)?;
            result.seed = cfg.seed;
            Ok(result)
        }
        Method::Mc | Method::Tmc => {
            let forced = ValuationConfig {
                truncation_tolerance: if cfg.method == Method::Mc {
                    0.0
                } else {
                    cfg.truncation_tolerance
                },
                ..cfg.clone()
            };
            if train.groups().is_some() {
                let members = train.group_members()?;
                let base = learner_score(spec, train, ev)?;
                let game = GroupScore::new(&base, members);
                permutation_shapley_game_internal(&game, &forced, false, progress)
                    .map(|(result, _)| result)
            } else {
                let game = learner_score(spec, train, ev)?;
                permutation_shapley_game_internal(&game, &forced, false, progress)
                    .map(|(result, _)| result)
            }
        }
        Method::Gshapley | Method::Loo if train.groups().is_some() => {
            Err(Error::InvalidArgument(format!(
                "group valuation does not support method '{}'; drop the group assignment \
                 for per-point values",
                cfg.method.name()
            )))
        }
        Method::Gshapley => g_shapley(train, spec, ev, cfg),
        Method::Loo => {
            let game = learner_score(spec, train, ev)?;
            let mut result = loo_values_game(&game, cfg.workers)?;
            result.seed = cfg.seed;
            Ok(result)
        }
    }
}

/// Full-set model of a spec, shared by several drivers.
pub fn fit_full(train: &Dataset, spec: &LearnerSpec) -> Result<TrainedModel> {
    fit(spec, train, &SourceSet::full(train.len()), None)
}
