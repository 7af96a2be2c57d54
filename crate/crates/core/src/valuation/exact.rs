//! Exact Shapley values by full subset enumeration.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::valuation::score::SubsetScore;
use crate::valuation::{Method, ValuationResult};

/// Hard cap: 2^20 cached coalition scores.
pub const EXACT_MAX_PLAYERS: usize = 20;

fn coalition_of(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// phi_i = (1/n) * sum over S not containing i of
/// [V(S + i) - V(S)] / C(n-1, |S|), with every coalition scored exactly once.
/// The 1/n normalization makes the values coincide with the permutation
/// expectation, so they sum to V(D) - V(empty).
pub fn exact_shapley_game(game: &dyn SubsetScore, workers: usize) -> Result<ValuationResult> {
    let n = game.players();
    if n == 0 {
        return Err(Error::InvalidArgument("game has no players".into()));
    }
    if n > EXACT_MAX_PLAYERS {
        return Err(Error::ExactTooLarge {
            n,
            max: EXACT_MAX_PLAYERS,
        });
    }
    let pool = crate::valuation::build_pool(workers)?;
    let size = 1usize << n;
    let scores: Vec<f64> = pool.install(|| {
        (0..size as u32)
            .into_par_iter()
            .map(|mask| game.score(&coalition_of(mask, n)))
            .collect()
    });

    // binom[s] = C(n-1, s); exact in f64 for n <= 20.
    let mut binom = vec![1.0f64; n];
    for s in 1..n {
        binom[s] = binom[s - 1] * (n - s) as f64 / s as f64;
    }

    let mut values = vec![0.0; n];
    for (i, value) in values.iter_mut().enumerate() {
        let bit = 1u32 << i;
        let mut total = 0.0;
        for mask in 0..size as u32 {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                total += (scores[(mask | bit) as usize] - scores[mask as usize]) / binom[s];
            }
        }
        *value = total / n as f64;
    }

    Ok(ValuationResult {
        method: Method::Exact,
        seed: 0,
        n,
        values,
        permutations_used: 0,
        converged: true,
        v_full: scores[size - 1],
        v_null: scores[0],
        history: Vec::new(),
    })
}
