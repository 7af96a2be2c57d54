//! Learning algorithms and the performance score.
//!
//! Every fit and evaluation here is a pure function of its inputs and seeds,
//! which is what lets the valuation engines cache, parallelize, and replay
//! subset scores freely. The empty subset trains to a designated null model:
//! the uniform-probability predictor whose accuracy is 1/K analytically and
//! whose negative cross-entropy is -ln K.

mod knn;
mod logistic;
mod naive_bayes;

pub use knn::KnnModel;
pub use logistic::LogisticModel;
pub use naive_bayes::NaiveBayesModel;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabeledPoint, SourceSet};
use crate::error::{Error, Result};
use crate::rng::{derive_rng, permutation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LogisticRegression,
    NaiveBayes,
    Knn,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::LogisticRegression => "logistic_regression",
            LearnerKind::NaiveBayes => "naive_bayes",
            LearnerKind::Knn => "knn",
        }
    }
}

/// The learning algorithm plus its hyperparameters.
///
/// Hyperparameter names are fixed across the config surface: `alpha`
/// (learning rate), `epochs`, `l2`, `k`, `smoothing`. `init_scale > 0`
/// requests a seeded random initialization for logistic regression; the
/// default zero initialization makes `fit_seed` inert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub l2: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default)]
    pub init_scale: f64,
    #[serde(default)]
    pub fit_seed: u64,
}

fn default_alpha() -> f64 {
    0.1
}
fn default_epochs() -> usize {
    100
}
fn default_k() -> usize {
    5
}
fn default_smoothing() -> f64 {
    1.0
}

impl LearnerSpec {
    pub fn logistic() -> Self {
        Self {
            kind: LearnerKind::LogisticRegression,
            alpha: default_alpha(),
            epochs: default_epochs(),
            l2: 0.0,
            k: default_k(),
            smoothing: default_smoothing(),
            init_scale: 0.0,
            fit_seed: 0,
        }
    }

    pub fn naive_bayes() -> Self {
        Self {
            kind: LearnerKind::NaiveBayes,
            ..Self::logistic()
        }
    }

    pub fn knn(k: usize) -> Self {
        Self {
            kind: LearnerKind::Knn,
            k,
            ..Self::logistic()
        }
    }

    pub fn is_differentiable(&self) -> bool {
        self.kind == LearnerKind::LogisticRegression
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            LearnerKind::LogisticRegression => {
                if self.alpha <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "alpha must be > 0, got {}",
                        self.alpha
                    )));
                }
                if self.epochs == 0 {
                    return Err(Error::InvalidArgument("epochs must be >= 1".into()));
                }
            }
            LearnerKind::NaiveBayes => {
                if self.smoothing <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "smoothing must be > 0, got {}",
                        self.smoothing
                    )));
                }
            }
            LearnerKind::Knn => {
                if self.k == 0 {
                    return Err(Error::InvalidArgument("k must be >= 1".into()));
                }
            }
        }
        if self.l2 < 0.0 {
            return Err(Error::InvalidArgument("l2 must be >= 0".into()));
        }
        Ok(())
    }
}

/// A fitted predictor. Immutable after `fit`.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    /// Trained on the empty subset: the uniform-probability predictor.
    Null { classes: usize },
    Logistic(LogisticModel),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
}

impl TrainedModel {
    pub fn is_null(&self) -> bool {
        matches!(self, TrainedModel::Null { .. })
    }

    pub fn num_classes(&self) -> usize {
        match self {
            TrainedModel::Null { classes } => *classes,
            TrainedModel::Logistic(m) => m.classes(),
            TrainedModel::NaiveBayes(m) => m.classes(),
            TrainedModel::Knn(m) => m.classes(),
        }
    }

    pub fn feature_dim(&self) -> Option<usize> {
        match self {
            TrainedModel::Null { .. } => None,
            TrainedModel::Logistic(m) => Some(m.dim()),
            TrainedModel::NaiveBayes(m) => Some(m.dim()),
            TrainedModel::Knn(m) => Some(m.dim()),
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TrainedModel::Null { classes } => vec![1.0 / *classes as f64; *classes],
            TrainedModel::Logistic(m) => m.proba(x),
            TrainedModel::NaiveBayes(m) => m.proba(x),
            TrainedModel::Knn(m) => m.proba(x),
        }
    }

    /// Argmax class; ties break toward the smaller class index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.predict_proba(x);
        let mut best = 0;
        for (k, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = k;
            }
        }
        best
    }
}

/// Train `spec` on the selected subset of `train`. Optional weights scale each
/// point's loss term (logistic), its counts (naive Bayes), or its vote (knn);
/// an integer weight is equivalent to replicating the point.
pub fn fit(
    spec: &LearnerSpec,
    train: &Dataset,
    subset: &SourceSet,
    weights: Option<&[f64]>,
) -> Result<TrainedModel> {
    spec.validate()?;
    if subset.universe_size() != train.len() {
        return Err(Error::InvalidArgument(format!(
            "subset universe {} does not match dataset size {}",
            subset.universe_size(),
            train.len()
        )));
    }
    if let Some(ws) = weights {
        if ws.len() != subset.len() {
            return Err(Error::WeightMismatch {
                expected: subset.len(),
                got: ws.len(),
            });
        }
        if ws.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and >= 0".into(),
            ));
        }
        if !subset.is_empty() && ws.iter().all(|&w| w == 0.0) {
            return Err(Error::AllZeroWeights);
        }
    }
    if subset.is_empty() {
        return Ok(TrainedModel::Null {
            classes: train.num_classes(),
        });
    }
    let indices = subset.indices();
    Ok(match spec.kind {
        LearnerKind::LogisticRegression => {
            let params = logistic::LogisticParams {
                alpha: spec.alpha,
                epochs: spec.epochs,
                l2: spec.l2,
                init_scale: spec.init_scale,
                fit_seed: spec.fit_seed,
            };
            TrainedModel::Logistic(logistic::fit_logistic(&params, train, indices, weights))
        }
        LearnerKind::NaiveBayes => TrainedModel::NaiveBayes(naive_bayes::fit_naive_bayes(
            spec.smoothing,
            train,
            indices,
            weights,
        )),
        LearnerKind::Knn => TrainedModel::Knn(knn::fit_knn(spec.k, train, indices, weights)),
    })
}

/// One step of gradient descent on the cross-entropy loss of a single point.
/// Only logistic regression supports this; the input model is unchanged.
pub fn gradient_step(model: &TrainedModel, point: &LabeledPoint, alpha: f64) -> Result<TrainedModel> {
    if alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha must be >= 0, got {alpha}"
        )));
    }
    match model {
        TrainedModel::Logistic(m) => Ok(TrainedModel::Logistic(
            logistic::gradient_step_logistic(m, point, alpha),
        )),
        TrainedModel::Null { .. } => Err(Error::NonDifferentiable("null".into())),
        TrainedModel::NaiveBayes(_) => Err(Error::NonDifferentiable("naive_bayes".into())),
        TrainedModel::Knn(_) => Err(Error::NonDifferentiable("knn".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    NegCrossEntropy,
}

/// The performance score V: an evaluation set, a metric, the analytic null
/// score V(empty), and an optional per-test-point breakdown.
#[derive(Debug, Clone)]
pub struct Evaluator {
    eval_set: Dataset,
    metric: Metric,
    null_score: f64,
    per_point: bool,
}

impl Evaluator {
    pub fn new(eval_set: Dataset, metric: Metric) -> Result<Self> {
        if eval_set.is_empty() {
            return Err(Error::InvalidArgument("evaluation set is empty".into()));
        }
        let k = eval_set.num_classes() as f64;
        let null_score = match metric {
            Metric::Accuracy => 1.0 / k,
            Metric::NegCrossEntropy => -k.ln(),
        };
        Ok(Self {
            eval_set,
            metric,
            null_score,
            per_point: false,
        })
    }

    pub fn with_per_point(mut self, flag: bool) -> Self {
        self.per_point = flag;
        self
    }

    pub fn eval_set(&self) -> &Dataset {
        &self.eval_set
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn null_score(&self) -> f64 {
        self.null_score
    }
}

/// Score a model on the evaluator's set. The score is the mean of the
/// per-point scores, returned alongside when the evaluator is flagged.
/// The null model scores its analytic value on every point.
pub fn evaluate(model: &TrainedModel, ev: &Evaluator) -> Result<(f64, Option<Vec<f64>>)> {
    if let Some(dim) = model.feature_dim() {
        if dim != ev.eval_set.feature_dim() {
            return Err(Error::DimMismatch {
                expected: ev.eval_set.feature_dim(),
                got: dim,
            });
        }
    }
    let m = ev.eval_set.len();
    let per_point: Vec<f64> = if model.is_null() {
        vec![ev.null_score; m]
    } else {
        ev.eval_set
            .points()
            .iter()
            .map(|p| match ev.metric {
                Metric::Accuracy => {
                    if model.predict(&p.features) == p.label {
                        1.0
                    } else {
                        0.0
                    }
                }
                Metric::NegCrossEntropy => {
                    let proba = model.predict_proba(&p.features);
                    proba[p.label].max(1e-12).ln()
                }
            })
            .collect()
    };
    let score = per_point.iter().sum::<f64>() / m as f64;
    Ok((score, ev.per_point.then_some(per_point)))
}

/// `multiplier` times the standard deviation of the score over `b` bootstrap
/// resamples (with replacement, same size) of the evaluation set.
pub fn bootstrap_tolerance(
    model: &TrainedModel,
    ev: &Evaluator,
    b: usize,
    multiplier: f64,
    seed: u64,
) -> Result<f64> {
    if b < 2 {
        return Err(Error::InvalidArgument(format!("need B >= 2, got {b}")));
    }
    if multiplier <= 0.0 {
        return Err(Error::InvalidArgument("multiplier must be > 0".into()));
    }
    let scored = ev.clone().with_per_point(true);
    let (_, per_point) = evaluate(model, &scored)?;
    let per_point = per_point.expect("per-point scores requested");
    let m = per_point.len();
    let mut rng = derive_rng(seed, "bootstrap", 0);
    let mut means = Vec::with_capacity(b);
    for _ in 0..b {
        let mut total = 0.0;
        for _ in 0..m {
            total += per_point[rng.random_range(0..m)];
        }
        means.push(total / m as f64);
    }
    let grand = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|x| (x - grand) * (x - grand)).sum::<f64>() / (b - 1) as f64;
    Ok(multiplier * var.sqrt())
}

/// Grid search for the one-pass learning rate: trains by sequential
/// single-point gradient steps over seeded permutations and scores the final
/// model on the evaluation set. Returns the best (alpha, mean score); ties
/// keep the earlier grid entry.
pub fn search_one_pass_alpha(
    spec: &LearnerSpec,
    train: &Dataset,
    ev: &Evaluator,
    grid: &[f64],
    passes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !spec.is_differentiable() {
        return Err(Error::NonDifferentiable(spec.kind.name().into()));
    }
    if grid.is_empty() || passes == 0 {
        return Err(Error::InvalidArgument(
            "grid must be nonempty and passes >= 1".into(),
        ));
    }
    let n = train.len();
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        if alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid alpha must be > 0, got {alpha}"
            )));
        }
        let mut total = 0.0;
        for pass in 0..passes {
            let mut rng = derive_rng(seed, "grid-search", pass as u64);
            let order = permutation(n, &mut rng);
            let mut model = TrainedModel::Logistic(LogisticModel::zeros(
                train.feature_dim(),
                train.num_classes(),
            ));
            for idx in order {
                model = gradient_step(&model, train.point(idx), alpha)?;
            }
            total += evaluate(&model, ev)?.0;
        }
        let score = total / passes as f64;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((alpha, score));
        }
    }
    Ok(best.expect("nonempty grid"))
}
