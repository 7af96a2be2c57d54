//! Regressors that predict a point's value from its observables so unseen
//! pool points can be ranked for acquisition. Inputs are the feature vector
//! concatenated with a one-hot label encoding.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    KnnRegressor { k: usize },
    DecisionTree { max_depth: usize },
}

impl Default for EstimatorKind {
    fn default() -> Self {
        EstimatorKind::KnnRegressor { k: 5 }
    }
}

const MIN_LEAF: usize = 2;

#[derive(Debug, Clone)]
enum TreeNode {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf(v) => *v,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone)]
enum EstimatorModel {
    Knn { k: usize },
    Tree(TreeNode),
}

/// Fitted value regressor over (features + one-hot label) inputs.
#[derive(Debug, Clone)]
pub struct ValueEstimator {
    feature_dim: usize,
    num_classes: usize,
    embeddings: Vec<Vec<f64>>,
    targets: Vec<f64>,
    model: EstimatorModel,
}

fn embed(features: &[f64], label: usize, num_classes: usize) -> Vec<f64> {
    let mut e = features.to_vec();
    for k in 0..num_classes {
        e.push(if k == label { 1.0 } else { 0.0 });
    }
    e
}

fn mean(values: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&r| values[r]).sum::<f64>() / rows.len() as f64
}

/// Greedy SSE-minimizing split search; features scanned in order, so the fit
/// is deterministic.
#[allow(clippy::needless_range_loop)]
fn grow(
    embeddings: &[Vec<f64>],
    targets: &[f64],
    rows: &[usize],
    depth: usize,
    max_depth: usize,
) -> TreeNode {
    let leaf_value = mean(targets, rows);
    if depth >= max_depth || rows.len() < 2 * MIN_LEAF {
        return TreeNode::Leaf(leaf_value);
    }
    let dims = embeddings[0].len();
    let total_sum: f64 = rows.iter().map(|&r| targets[r]).sum();
    let total_sq: f64 = rows.iter().map(|&r| targets[r] * targets[r]).sum();
    let base_sse = total_sq - total_sum * total_sum / rows.len() as f64;
    if base_sse <= 1e-18 {
        return TreeNode::Leaf(leaf_value);
    }
    let mut best: Option<(f64, usize, f64)> = None; // (sse, feature, threshold)
    for d in 0..dims {
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| {
            embeddings[a][d]
                .partial_cmp(&embeddings[b][d])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for i in 0..order.len() - 1 {
            let t = targets[order[i]];
            left_sum += t;
            left_sq += t * t;
            let (xa, xb) = (embeddings[order[i]][d], embeddings[order[i + 1]][d]);
            if xa == xb {
                continue;
            }
            let left_n = i + 1;
            let right_n = order.len() - left_n;
            if left_n < MIN_LEAF || right_n < MIN_LEAF {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let sse = (left_sq - left_sum * left_sum / left_n as f64)
                + (right_sq - right_sum * right_sum / right_n as f64);
            if best.map_or(sse < base_sse - 1e-12, |(b, _, _)| sse < b) {
                best = Some((sse, d, 0.5 * (xa + xb)));
            }
        }
    }
    match best {
        None => TreeNode::Leaf(leaf_value),
        Some((_, feature, threshold)) => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| embeddings[r][feature] <= threshold);
            TreeNode::Split {
                feature,
                threshold,
                left: Box::new(grow(embeddings, targets, &left_rows, depth + 1, max_depth)),
                right: Box::new(grow(embeddings, targets, &right_rows, depth + 1, max_depth)),
            }
        }
    }
}

/// Fit a regressor mapping (features + one-hot label) to the computed value.
pub fn fit_value_estimator(
    train: &Dataset,
    values: &[f64],
    kind: EstimatorKind,
) -> Result<ValueEstimator> {
    if values.len() != train.len() {
        return Err(Error::LengthMismatch {
            a: values.len(),
            b: train.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    let num_classes = train.num_classes();
    let embeddings: Vec<Vec<f64>> = train
        .points()
        .iter()
        .map(|p| embed(&p.features, p.label, num_classes))
        .collect();
    let targets = values.to_vec();
    let model = match kind {
        EstimatorKind::KnnRegressor { k } => {
            if k == 0 {
                return Err(Error::InvalidArgument("k must be >= 1".into()));
            }
            EstimatorModel::Knn { k }
        }
        EstimatorKind::DecisionTree { max_depth } => {
            if max_depth == 0 {
                return Err(Error::InvalidArgument("max_depth must be >= 1".into()));
            }
            let rows: Vec<usize> = (0..embeddings.len()).collect();
            EstimatorModel::Tree(grow(&embeddings, &targets, &rows, 0, max_depth))
        }
    };
    Ok(ValueEstimator {
        feature_dim: train.feature_dim(),
        num_classes,
        embeddings,
        targets,
        model,
    })
}

/// Predict a value for every pool point.
pub fn estimate(est: &ValueEstimator, pool: &Dataset) -> Result<Vec<f64>> {
    if pool.feature_dim() != est.feature_dim {
        return Err(Error::DimMismatch {
            expected: est.feature_dim,
            got: pool.feature_dim(),
        });
    }
    if pool.num_classes() > est.num_classes {
        return Err(Error::InvalidArgument(format!(
            "pool has {} classes, estimator was fit with {}",
            pool.num_classes(),
            est.num_classes
        )));
    }
    Ok(pool
        .points()
        .iter()
        .map(|p| {
            let x = embed(&p.features, p.label, est.num_classes);
            match &est.model {
                EstimatorModel::Tree(tree) => tree.predict(&x),
                EstimatorModel::Knn { k } => {
                    let mut order: Vec<(f64, usize)> = est
                        .embeddings
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            let d2: f64 =
                                e.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
                            (d2, i)
                        })
                        .collect();
                    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                    let take = (*k).min(order.len());
                    order
                        .iter()
                        .take(take)
                        .map(|&(_, i)| est.targets[i])
                        .sum::<f64>()
                        / take as f64
                }
            }
        })
        .collect())
}
