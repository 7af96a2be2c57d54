//! k-nearest-neighbor classifier over stored exemplars.

use crate::dataset::Dataset;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    /// (features, label, vote weight) in subset order.
    exemplars: Vec<(Vec<f64>, usize, f64)>,
    k: usize,
    dim: usize,
    classes: usize,
}

impl KnnModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Vote shares of the k' = min(k, |exemplars|) nearest exemplars.
    /// Distance ties break by exemplar order, so predictions are total.
    pub fn proba(&self, x: &[f64]) -> Vec<f64> {
        let mut order: Vec<(f64, usize)> = self
            .exemplars
            .iter()
            .enumerate()
            .map(|(i, (f, _, _))| {
                let d2: f64 = f.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let take = self.k.min(order.len());
        let mut votes = vec![0.0; self.classes];
        let mut total = 0.0;
        for &(_, i) in order.iter().take(take) {
            let (_, label, w) = &self.exemplars[i];
            votes[*label] += w;
            total += w;
        }
        if total > 0.0 {
            votes.iter_mut().for_each(|v| *v /= total);
            votes
        } else {
            vec![1.0 / self.classes as f64; self.classes]
        }
    }
}

pub(crate) fn fit_knn(
    k: usize,
    train: &Dataset,
    subset: &[usize],
    weights: Option<&[f64]>,
) -> KnnModel {
    let exemplars = subset
        .iter()
        .enumerate()
        .map(|(pos, &idx)| {
            let p = train.point(idx);
            let w = weights.map_or(1.0, |ws| ws[pos]);
            (p.features.clone(), p.label, w)
        })
        .collect();
    KnnModel {
        exemplars,
        k,
        dim: train.feature_dim(),
        classes: train.num_classes(),
    }
}
