//! Coalition score functions.
//!
//! The estimators are generic over [`SubsetScore`], the map from a coalition
//! of players to a performance score. Production valuation scores a learner
//! fit on the coalition; tests inject plug-in games directly.

use crate::dataset::{Dataset, SourceSet};
use crate::error::Result;
use crate::learners::{evaluate, fit, Evaluator, LearnerSpec};

/// V: a score for every coalition of players, given as a strictly increasing
/// index slice into `0..players()`.
pub trait SubsetScore: Sync {
    fn players(&self) -> usize;
    fn score(&self, coalition: &[usize]) -> f64;
}

/// Scores a coalition of training points by fitting the learner on it and
/// evaluating the result.
pub struct LearnerScore<'a> {
    spec: &'a LearnerSpec,
    train: &'a Dataset,
    ev: &'a Evaluator,
}

impl<'a> LearnerScore<'a> {
    pub fn new(spec: &'a LearnerSpec, train: &'a Dataset, ev: &'a Evaluator) -> Result<Self> {
        spec.validate()?;
        // Surface dimension mismatches before any estimator spends work.
        let probe = fit(spec, train, &SourceSet::empty(train.len()), None)?;
        evaluate(&probe, ev)?;
        if train.feature_dim() != ev.eval_set().feature_dim() {
            return Err(crate::error::Error::DimMismatch {
                expected: train.feature_dim(),
                got: ev.eval_set().feature_dim(),
            });
        }
        Ok(Self { spec, train, ev })
    }
}

impl SubsetScore for LearnerScore<'_> {
    fn players(&self) -> usize {
        self.train.len()
    }

    fn score(&self, coalition: &[usize]) -> f64 {
        let subset = SourceSet::new(coalition.to_vec(), self.train.len())
            .expect("engine passes valid coalitions");
        let model = fit(self.spec, self.train, &subset, None).expect("validated inputs");
        evaluate(&model, self.ev).expect("validated inputs").0
    }
}

/// Lifts a point-level score to group players: a coalition of groups scores
/// as the union of their member points.
pub struct GroupScore<'a, S: SubsetScore> {
    inner: &'a S,
    members: Vec<Vec<usize>>,
}

impl<'a, S: SubsetScore> GroupScore<'a, S> {
    pub fn new(inner: &'a S, members: Vec<Vec<usize>>) -> Self {
        Self { inner, members }
    }
}

impl<S: SubsetScore> SubsetScore for GroupScore<'_, S> {
    fn players(&self) -> usize {
        self.members.len()
    }

    fn score(&self, coalition: &[usize]) -> f64 {
        let mut points: Vec<usize> = coalition
            .iter()
            .flat_map(|&g| self.members[g].iter().copied())
            .collect();
        points.sort_unstable();
        self.inner.score(&points)
    }
}
