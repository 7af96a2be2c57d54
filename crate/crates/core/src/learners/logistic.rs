//! Multinomial logistic regression trained by full-batch gradient descent.
//!
//! Training is a pure function of (hyperparameters, subset, weights): zero
//! initialization by default, fixed epoch count, fixed learning rate. The
//! seeded random initialization only engages when `init_scale > 0`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, LabeledPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// Row-major `classes x dim` weight matrix.
    weights: Vec<f64>,
    bias: Vec<f64>,
    dim: usize,
    classes: usize,
}

impl LogisticModel {
    pub fn zeros(dim: usize, classes: usize) -> Self {
        Self {
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
            dim,
            classes,
        }
    }

    pub fn random_init(dim: usize, classes: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let mut model = Self::zeros(dim, classes);
        for w in model.weights.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *w = scale * z;
        }
        for b in model.bias.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *b = scale * z;
        }
        model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|k| {
                let row = &self.weights[k * self.dim..(k + 1) * self.dim];
                self.bias[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect()
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    /// Cross-entropy loss of this model on a single point (no regularizer).
    pub fn point_loss(&self, point: &LabeledPoint) -> f64 {
        let p = self.proba(&point.features);
        -p[point.label].max(1e-300).ln()
    }

    /// Flat parameter vector: weights row-major, then biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = self.weights.clone();
        flat.extend_from_slice(&self.bias);
        flat
    }

    pub fn from_flat(dim: usize, classes: usize, flat: Vec<f64>) -> Self {
        assert_eq!(flat.len(), classes * dim + classes);
        let (weights, bias) = flat.split_at(classes * dim);
        Self {
            weights: weights.to_vec(),
            bias: bias.to_vec(),
            dim,
            classes,
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub(crate) struct LogisticParams {
    pub alpha: f64,
    pub epochs: usize,
    pub l2: f64,
    pub init_scale: f64,
    pub fit_seed: u64,
}

/// Full-batch gradient descent on the weighted-mean cross-entropy objective
/// plus (l2/2)||W||^2 (biases unregularized). The weight of each point scales
/// its loss term; the denominator is the total weight, so an integer weight w
/// is exactly equivalent to replicating the point w times.
pub(crate) fn fit_logistic(
    params: &LogisticParams,
    train: &Dataset,
    subset: &[usize],
    weights: Option<&[f64]>,
) -> LogisticModel {
    let dim = train.feature_dim();
    let classes = train.num_classes();
    let mut model = if params.init_scale > 0.0 {
        let mut rng = crate::rng::derive_rng(params.fit_seed, "logistic-init", 0);
        LogisticModel::random_init(dim, classes, params.init_scale, &mut rng)
    } else {
        LogisticModel::zeros(dim, classes)
    };
    let denom: f64 = match weights {
        Some(ws) => ws.iter().sum(),
        None => subset.len() as f64,
    };
    let mut grad_w = vec![0.0; classes * dim];
    let mut grad_b = vec![0.0; classes];
    for _ in 0..params.epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        grad_b.iter_mut().for_each(|g| *g = 0.0);
        for (pos, &idx) in subset.iter().enumerate() {
            let point = train.point(idx);
            let p = model.proba(&point.features);
            let w = weights.map_or(1.0, |ws| ws[pos]);
            for k in 0..classes {
                let target = if k == point.label { 1.0 } else { 0.0 };
                let g = (p[k] - target) * w / denom;
                grad_b[k] += g;
                let row = &mut grad_w[k * dim..(k + 1) * dim];
                for (gw, &x) in row.iter_mut().zip(&point.features) {
                    *gw += g * x;
                }
            }
        }
        if params.l2 > 0.0 {
            for (gw, &w) in grad_w.iter_mut().zip(&model.weights) {
                *gw += params.l2 * w;
            }
        }
        for (w, g) in model.weights.iter_mut().zip(&grad_w) {
            *w -= params.alpha * g;
        }
        for (b, g) in model.bias.iter_mut().zip(&grad_b) {
            *b -= params.alpha * g;
        }
    }
    model
}

/// One gradient step on the cross-entropy loss of a single point.
pub(crate) fn gradient_step_logistic(
    model: &LogisticModel,
    point: &LabeledPoint,
    alpha: f64,
) -> LogisticModel {
    let mut next = model.clone();
    let p = model.proba(&point.features);
    let dim = model.dim;
    for (k, &pk) in p.iter().enumerate() {
        let target = if k == point.label { 1.0 } else { 0.0 };
        let g = pk - target;
        next.bias[k] -= alpha * g;
        let row = &mut next.weights[k * dim..(k + 1) * dim];
        for (w, &x) in row.iter_mut().zip(&point.features) {
            *w -= alpha * g * x;
        }
    }
    next
}
