//! Gaussian naive Bayes with Laplace-smoothed class priors.

use crate::dataset::Dataset;
use crate::learners::logistic::softmax;

const VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    log_prior: Vec<f64>,
    /// Row-major `classes x dim`.
    mean: Vec<f64>,
    var: Vec<f64>,
    dim: usize,
    classes: usize,
}

impl NaiveBayesModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let log_joint: Vec<f64> = (0..self.classes)
            .map(|k| {
                let mut lj = self.log_prior[k];
                for (d, &xd) in x.iter().enumerate() {
                    let mu = self.mean[k * self.dim + d];
                    let var = self.var[k * self.dim + d];
                    let diff = xd - mu;
                    lj += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + diff * diff / var);
                }
                lj
            })
            .collect();
        softmax(&log_joint)
    }
}

/// Weighted sufficient statistics over the subset. Classes absent from the
/// subset keep a nonzero smoothed prior and fall back to the pooled Gaussian.
pub(crate) fn fit_naive_bayes(
    smoothing: f64,
    train: &Dataset,
    subset: &[usize],
    weights: Option<&[f64]>,
) -> NaiveBayesModel {
    let dim = train.feature_dim();
    let classes = train.num_classes();
    let weight_of = |pos: usize| weights.map_or(1.0, |ws| ws[pos]);

    let mut class_w = vec![0.0; classes];
    let mut sum = vec![0.0; classes * dim];
    let mut pooled_w = 0.0;
    let mut pooled_sum = vec![0.0; dim];
    for (pos, &idx) in subset.iter().enumerate() {
        let p = train.point(idx);
        let w = weight_of(pos);
        class_w[p.label] += w;
        pooled_w += w;
        for d in 0..dim {
            sum[p.label * dim + d] += w * p.features[d];
            pooled_sum[d] += w * p.features[d];
        }
    }
    let pooled_mean: Vec<f64> = pooled_sum.iter().map(|s| s / pooled_w).collect();

    let mut mean = vec![0.0; classes * dim];
    for k in 0..classes {
        for d in 0..dim {
            mean[k * dim + d] = if class_w[k] > 0.0 {
                sum[k * dim + d] / class_w[k]
            } else {
                pooled_mean[d]
            };
        }
    }

    let mut sq = vec![0.0; classes * dim];
    let mut pooled_sq = vec![0.0; dim];
    for (pos, &idx) in subset.iter().enumerate() {
        let p = train.point(idx);
        let w = weight_of(pos);
        for d in 0..dim {
            let dc = p.features[d] - mean[p.label * dim + d];
            sq[p.label * dim + d] += w * dc * dc;
            let dp = p.features[d] - pooled_mean[d];
            pooled_sq[d] += w * dp * dp;
        }
    }
    let pooled_var: Vec<f64> = pooled_sq
        .iter()
        .map(|s| (s / pooled_w).max(VAR_FLOOR))
        .collect();
    let mut var = vec![0.0; classes * dim];
    for k in 0..classes {
        for d in 0..dim {
            var[k * dim + d] = if class_w[k] > 0.0 {
                (sq[k * dim + d] / class_w[k]).max(VAR_FLOOR)
            } else {
                pooled_var[d]
            };
        }
    }

    let denom = pooled_w + classes as f64 * smoothing;
    let log_prior = class_w
        .iter()
        .map(|&cw| ((cw + smoothing) / denom).ln())
        .collect();

    NaiveBayesModel {
        log_prior,
        mean,
        var,
        dim,
        classes,
    }
}
