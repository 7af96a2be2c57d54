//! Gradient-based one-pass valuation.
//!
//! Instead of refitting on every prefix, each sampled permutation trains a
//! freshly initialized differentiable model by one gradient step per point,
//! scoring the model after every step. The marginal of a point is the score
//! change produced by its step.

use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learners::{evaluate, Evaluator, LearnerSpec, LogisticModel, TrainedModel};
use crate::rng::{derive_rng, permutation};
use crate::valuation::engine::{run_windows, EngineOutput, PermutationRecord};
use crate::valuation::{ValuationConfig, WindowProgress};

/// Scale of the per-iteration random parameter initialization.
pub const INIT_SIGMA: f64 = 0.05;

/// A game trained by sequential single-point gradient steps.
pub(crate) trait GradientGame: Sync {
    type State;
    fn players(&self) -> usize;
    fn init(&self, rng: &mut ChaCha8Rng) -> Self::State;
    fn step(&self, state: Self::State, player: usize) -> Self::State;
    fn value(&self, state: &Self::State) -> f64;
}

pub(crate) struct LogisticGradientGame<'a> {
    pub train: &'a Dataset,
    pub ev: &'a Evaluator,
    pub alpha: f64,
}

impl GradientGame for LogisticGradientGame<'_> {
    type State = TrainedModel;

    fn players(&self) -> usize {
        self.train.len()
    }

    fn init(&self, rng: &mut ChaCha8Rng) -> TrainedModel {
        TrainedModel::Logistic(LogisticModel::random_init(
            self.train.feature_dim(),
            self.train.num_classes(),
            INIT_SIGMA,
            rng,
        ))
    }

    fn step(&self, state: TrainedModel, player: usize) -> TrainedModel {
        crate::learners::gradient_step(&state, self.train.point(player), self.alpha)
            .expect("logistic state is differentiable")
    }

    fn value(&self, state: &TrainedModel) -> f64 {
        evaluate(state, self.ev).expect("validated inputs").0
    }
}

/// One iteration: n gradient steps, n + 1 evaluations.
fn scan_gradient<G: GradientGame>(game: &G, iteration: usize, seed: u64) -> PermutationRecord {
    let n = game.players();
    let mut rng = derive_rng(seed, "gshapley", iteration as u64);
    let order = permutation(n, &mut rng);
    let mut state = game.init(&mut rng);
    let mut v_prev = game.value(&state);
    let mut marginals = vec![0.0; n];
    for &player in &order {
        state = game.step(state, player);
        let v = game.value(&state);
        marginals[player] = v - v_prev;
        v_prev = v;
    }
    PermutationRecord {
        iteration,
        permutation: order,
        marginals,
        truncation_position: n,
    }
}

pub(crate) fn run_gradient_engine<G: GradientGame>(
    game: &G,
    cfg: &ValuationConfig,
    progress: Option<&mut dyn FnMut(WindowProgress)>,
) -> Result<EngineOutput> {
    run_windows(
        game.players(),
        cfg,
        |t| scan_gradient(game, t, cfg.seed),
        false,
        progress,
    )
}

pub(crate) fn require_gshapley_alpha(spec: &LearnerSpec, cfg: &ValuationConfig) -> Result<f64> {
    if !spec.is_differentiable() {
        return Err(Error::NonDifferentiable(spec.kind.name().into()));
    }
    match cfg.alpha {
        Some(a) if a > 0.0 => Ok(a),
        Some(a) => Err(Error::InvalidArgument(format!(
            "gshapley alpha must be > 0, got {a}"
        ))),
        None => Err(Error::InvalidArgument(
            "gshapley requires an alpha (use the one-pass grid search)".into(),
        )),
    }
}
