//! Equitable valuation of training data.
//!
//! Given a training set, a learning algorithm, and a performance score, this
//! crate assigns each training source the value it contributes to the learned
//! predictor: the Shapley value of the cooperative game whose players are the
//! sources and whose reward is the score of a model trained on a coalition.
//!
//! The estimators:
//! - [`valuation::exact_shapley`] enumerates all 2^n coalitions (n <= 20);
//! - [`valuation::mc_shapley`] samples permutations and averages marginal
//!   contributions;
//! - [`valuation::tmc_shapley`] additionally truncates each permutation scan
//!   once the prefix score is within a tolerance of the full-data score;
//! - [`valuation::g_shapley`] replaces prefix refits with one gradient step
//!   per point for differentiable learners;
//! - [`valuation::group_shapley`] values whole groups of points;
//! - [`valuation::loo_values`] is the leave-one-out baseline.
//!
//! Everything is deterministic given a master seed: permutation `t` derives
//! its randomness from `(seed, t)` alone and results merge in iteration
//! order, so outputs are byte-identical across runs and worker counts.
//!
//! [`workflows`] builds the downstream experiment drivers: corruption
//! inspection curves, removal/addition curves, value-estimator-guided
//! acquisition, and adaptation reweighting.

pub mod dataset;
pub mod error;
pub mod learners;
pub mod rng;
pub mod valuation;
pub mod workflows;

pub use error::{Error, Result};
