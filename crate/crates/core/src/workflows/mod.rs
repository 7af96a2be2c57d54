//! Experiment drivers: inspection curves over corrupted data, removal and
//! addition curves, value-guided acquisition, adaptation reweighting, and
//! cross-method rank comparison.

mod estimator;

pub use estimator::{estimate, fit_value_estimator, EstimatorKind, ValueEstimator};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SourceSet};
use crate::error::{Error, Result};
use crate::learners::{evaluate, fit, Evaluator, LearnerSpec};

/// Ordered (fraction processed, score) pairs emitted by the drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub label: String,
}

impl Curve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                a: xs.len(),
                b: ys.len(),
            });
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "curve xs must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            xs,
            ys,
            label: label.into(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// y at the sampled x closest to the requested fraction.
    pub fn y_near(&self, x: f64) -> f64 {
        let mut best = 0;
        for (i, &xi) in self.xs.iter().enumerate() {
            if (xi - x).abs() < (self.xs[best] - x).abs() {
                best = i;
            }
        }
        self.ys[best]
    }

    pub fn write_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "x,y,label")?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            writeln!(w, "{x},{y},{}", self.label)?;
        }
        Ok(())
    }
}

/// Removal/addition processing order over the value ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueOrder {
    /// Most valuable first.
    Desc,
    /// Least valuable first.
    Asc,
}

/// Indices sorted by value in the requested order; ties break by index.
fn rank_indices(values: &[f64], order: ValueOrder) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        let cmp = values[a].partial_cmp(&values[b]).unwrap();
        match order {
            ValueOrder::Asc => cmp.then(a.cmp(&b)),
            ValueOrder::Desc => cmp.reverse().then(a.cmp(&b)),
        }
    });
    idx
}

/// Recall of the corrupted set while inspecting sources from least to most
/// valuable. A pure rank statistic: any strictly monotone transform of the
/// values yields the same curve.
pub fn inspection_curve(values: &[f64], corrupted: &SourceSet) -> Result<Curve> {
    if corrupted.is_empty() {
        return Err(Error::InvalidArgument("corrupted set is empty".into()));
    }
    let n = values.len();
    if corrupted.universe_size() != n {
        return Err(Error::LengthMismatch {
            a: corrupted.universe_size(),
            b: n,
        });
    }
    let order = rank_indices(values, ValueOrder::Asc);
    let total = corrupted.len() as f64;
    let mut found = 0usize;
    let mut xs = Vec::with_capacity(n + 1);
    let mut ys = Vec::with_capacity(n + 1);
    xs.push(0.0);
    ys.push(0.0);
    for (m, &i) in order.iter().enumerate() {
        if corrupted.contains(i) {
            found += 1;
        }
        xs.push((m + 1) as f64 / n as f64);
        ys.push(found as f64 / total);
    }
    Curve::new(xs, ys, "inspection")
}

fn curve_counts(n: usize, step: usize, max_fraction: f64) -> Result<Vec<usize>> {
    if step == 0 {
        return Err(Error::InvalidArgument("step must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&max_fraction) {
        return Err(Error::InvalidArgument(
            "max fraction must lie in [0, 1]".into(),
        ));
    }
    let cap = (n as f64 * max_fraction).floor() as usize;
    Ok((0..=cap).step_by(step).collect())
}

/// Remove sources `step` at a time in the given value order, refit on the
/// remainder, and score on the held-out evaluator. Stops once `max_fraction`
/// of the sources are gone.
pub fn removal_curve(
    train: &Dataset,
    values: &[f64],
    order: ValueOrder,
    spec: &LearnerSpec,
    heldout: &Evaluator,
    step: usize,
    max_fraction: f64,
) -> Result<Curve> {
    let n = train.len();
    if values.len() != n {
        return Err(Error::LengthMismatch {
            a: values.len(),
            b: n,
        });
    }
    let ranked = rank_indices(values, order);
    let counts = curve_counts(n, step, max_fraction)?;
    let ys: Vec<f64> = counts
        .par_iter()
        .map(|&count| {
            let mut removed = vec![false; n];
            for &i in &ranked[..count] {
                removed[i] = true;
            }
            let keep: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
            let subset = SourceSet::new(keep, n)?;
            let model = fit(spec, train, &subset, None)?;
            Ok(evaluate(&model, heldout)?.0)
        })
        .collect::<Result<_>>()?;
    let xs = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let label = match order {
        ValueOrder::Desc => "removal_desc",
        ValueOrder::Asc => "removal_asc",
    };
    Curve::new(xs, ys, label)
}

/// Add pool points `step` at a time in estimated-value order on top of the
/// base training set, refit, and score on the held-out evaluator.
#[allow(clippy::too_many_arguments)]
pub fn addition_curve(
    base_train: &Dataset,
    pool: &Dataset,
    estimated_values: &[f64],
    order: ValueOrder,
    spec: &LearnerSpec,
    heldout: &Evaluator,
    step: usize,
    max_fraction: f64,
) -> Result<Curve> {
    let np = pool.len();
    if estimated_values.len() != np {
        return Err(Error::LengthMismatch {
            a: estimated_values.len(),
            b: np,
        });
    }
    let combined = Dataset::concat(base_train, pool)?;
    let nb = base_train.len();
    let ranked = rank_indices(estimated_values, order);
    let counts = curve_counts(np, step, max_fraction)?;
    let ys: Vec<f64> = counts
        .par_iter()
        .map(|&count| {
            let mut indices: Vec<usize> = (0..nb).collect();
            indices.extend(ranked[..count].iter().map(|&j| nb + j));
            let subset = SourceSet::new(indices, combined.len())?;
            let model = fit(spec, &combined, &subset, None)?;
            Ok(evaluate(&model, heldout)?.0)
        })
        .collect::<Result<_>>()?;
    let xs = counts.iter().map(|&c| c as f64 / np as f64).collect();
    let label = match order {
        ValueOrder::Desc => "addition_desc",
        ValueOrder::Asc => "addition_asc",
    };
    Curve::new(xs, ys, label)
}

/// Adaptation weights: zero for non-positive values, otherwise the value
/// rescaled so positive-value sources average weight one. The output slots
/// straight into `fit(..., weights)`.
pub fn adapt_reweight(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    let positives: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    if positives.is_empty() {
        return Err(Error::NoPositiveValues);
    }
    let total: f64 = positives.iter().sum();
    let count = positives.len() as f64;
    Ok(values
        .iter()
        .map(|&v| if v > 0.0 { v / total * count } else { 0.0 })
        .collect())
}

fn mean_of(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples".into()));
    }
    let (ma, mb) = (mean_of(a), mean_of(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        // Degenerate: constant input. Equal vectors correlate perfectly.
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok(cov / (va * vb).sqrt())
}

/// Average ranks, ties sharing the mean rank of their block.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0; // 1-based ranks i+1 ..= j+1
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average-rank tie handling.
pub fn rank_correlation(values_a: &[f64], values_b: &[f64]) -> Result<f64> {
    if values_a.len() != values_b.len() {
        return Err(Error::LengthMismatch {
            a: values_a.len(),
            b: values_b.len(),
        });
    }
    if values_a.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples".into()));
    }
    pearson(&average_ranks(values_a), &average_ranks(values_b))
}
