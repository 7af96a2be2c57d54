//! Deterministic parallel permutation sampling with truncation.
//!
//! Iterations are independent work units: iteration `t` derives its
//! permutation (and any other randomness) solely from (seed, t), a window of
//! iterations is computed in parallel, and results merge into the running
//! mean in ascending `t`. Accumulation order is therefore fixed, so the
//! output bits do not depend on the worker count.

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::{derive_rng, permutation};
use crate::valuation::score::SubsetScore;
use crate::valuation::{ValuationConfig, WindowProgress};

/// One sampled permutation and its per-player marginal contributions.
/// Marginals at and beyond the truncation position are exactly zero.
#[derive(Debug, Clone)]
pub struct PermutationRecord {
    pub iteration: usize,
    pub permutation: Vec<usize>,
    pub marginals: Vec<f64>,
    /// Scan position where truncation fired; `n` when the scan completed.
    pub truncation_position: usize,
}

pub(crate) struct EngineOutput {
    pub values: Vec<f64>,
    pub permutations_used: usize,
    pub converged: bool,
    /// (iteration, running values) snapshot at the end of each window.
    pub history: Vec<(usize, Vec<f64>)>,
    pub records: Vec<PermutationRecord>,
}

/// Mean relative change per source between two value snapshots.
fn relative_shift(prev: &[f64], cur: &[f64]) -> f64 {
    let n = cur.len() as f64;
    prev.iter()
        .zip(cur)
        .map(|(p, c)| (c - p).abs() / (c.abs() + 1e-12))
        .sum::<f64>()
        / n
}

/// Convergence verdict over a per-iteration history of value snapshots:
/// true iff the mean relative change per source between the latest snapshot
/// and the one `window` iterations earlier is below `threshold`. Needs at
/// least `window + 1` snapshots for a positive verdict.
pub fn has_converged(history: &[Vec<f64>], threshold: f64, window: usize) -> bool {
    if window == 0 || history.len() < window + 1 {
        return false;
    }
    let cur = &history[history.len() - 1];
    let prev = &history[history.len() - 1 - window];
    relative_shift(prev, cur) < threshold
}

/// Scan one permutation left to right. `v_prev` starts at V(empty); once
/// |V(D) - v_prev| drops below the tolerance the remaining marginals stay
/// zero and no further coalitions are scored.
pub(crate) fn scan_permutation(
    game: &dyn SubsetScore,
    iteration: usize,
    seed: u64,
    tolerance: f64,
    v_null: f64,
    v_full: f64,
) -> PermutationRecord {
    let n = game.players();
    let mut rng = derive_rng(seed, "permutation", iteration as u64);
    let order = permutation(n, &mut rng);
    let mut marginals = vec![0.0; n];
    let mut prefix: Vec<usize> = Vec::with_capacity(n);
    let mut v_prev = v_null;
    let mut truncation_position = n;
    for (j, &player) in order.iter().enumerate() {
        if (v_full - v_prev).abs() < tolerance {
            truncation_position = j;
            break;
        }
        let at = prefix.partition_point(|&p| p < player);
        prefix.insert(at, player);
        let v_j = game.score(&prefix);
        marginals[player] = v_j - v_prev;
        v_prev = v_j;
    }
    PermutationRecord {
        iteration,
        permutation: order,
        marginals,
        truncation_position,
    }
}

/// Shared window loop: produce iteration records in parallel, merge them in
/// ascending iteration order, check convergence every window.
pub(crate) fn run_windows<F>(
    n: usize,
    cfg: &ValuationConfig,
    scan: F,
    keep_records: bool,
    mut progress: Option<&mut dyn FnMut(WindowProgress)>,
) -> Result<EngineOutput>
where
    F: Fn(usize) -> PermutationRecord + Sync,
{
    let pool = crate::valuation::build_pool(cfg.workers)?;
    let window = cfg.convergence_window.max(1);
    let mut values = vec![0.0; n];
    let mut t = 0usize;
    let mut prev_snapshot = values.clone();
    let mut history = Vec::new();
    let mut records = Vec::new();
    let mut converged = false;
    while t < cfg.max_permutations && !converged {
        let take = window.min(cfg.max_permutations - t);
        let batch: Vec<PermutationRecord> =
            pool.install(|| ((t + 1)..=(t + take)).into_par_iter().map(&scan).collect());
        for record in batch {
            t += 1;
            debug_assert_eq!(record.iteration, t);
            let tt = t as f64;
            for (value, marginal) in values.iter_mut().zip(&record.marginals) {
                *value = (tt - 1.0) / tt * *value + marginal / tt;
            }
            if keep_records {
                records.push(record);
            }
        }
        history.push((t, values.clone()));
        // Full windows compare the running mean against its state one window
        // ago, the same quantity `has_converged` reads from a per-iteration
        // history.
        if take == window && relative_shift(&prev_snapshot, &values) < cfg.convergence_threshold {
            converged = true;
        }
        prev_snapshot.copy_from_slice(&values);
        if let Some(cb) = progress.as_deref_mut() {
            cb(WindowProgress {
                iteration: t,
                converged,
            });
        }
    }
    Ok(EngineOutput {
        values,
        permutations_used: t,
        converged,
        history,
        records,
    })
}
