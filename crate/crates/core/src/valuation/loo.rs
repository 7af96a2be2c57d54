//! Leave-one-out baseline: phi_i = V(D) - V(D - {i}).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::valuation::score::SubsetScore;
use crate::valuation::{Method, ValuationResult};

pub fn loo_values_game(game: &dyn SubsetScore, workers: usize) -> Result<ValuationResult> {
    let n = game.players();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "leave-one-out needs n >= 2, got {n}"
        )));
    }
    let pool = crate::valuation::build_pool(workers)?;
    let all: Vec<usize> = (0..n).collect();
    let v_full = game.score(&all);
    let v_null = game.score(&[]);
    let values: Vec<f64> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let without: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                v_full - game.score(&without)
            })
            .collect()
    });
    Ok(ValuationResult {
        method: Method::Loo,
        seed: 0,
        n,
        values,
        permutations_used: 0,
        converged: true,
        v_full,
        v_null,
        history: Vec::new(),
    })
}
