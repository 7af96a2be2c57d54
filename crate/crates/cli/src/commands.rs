//! The CLI commands: `value`, `experiment <which>`, and `grid-search`.
//!
//! Machine-readable outputs (values.json, history.csv, curve CSVs,
//! summary.json, manifest.json) go to the output directory; standard output
//! carries one human-readable progress line per convergence window.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use datavalue::dataset::{flip_labels, add_feature_noise, Dataset};
use datavalue::learners::{
    evaluate, fit, search_one_pass_alpha, Evaluator, LearnerKind, LearnerSpec,
};
use datavalue::dataset::SourceSet;
use datavalue::rng::derive_rng;
use datavalue::valuation::{
    compute_values, Method, ValuationConfig, ValuationResult, EXACT_MAX_PLAYERS,
};
use datavalue::workflows::{
    adapt_reweight, addition_curve, estimate, fit_value_estimator, inspection_curve,
    rank_correlation, removal_curve, Curve, ValueOrder,
};

use crate::run::{
    ensure_out_dir, overlap_count, prepare, resolve_truncation, valuation_config, write_curve_csv,
    write_json, write_manifest, Prepared,
};
use crate::{CliError, Which};

fn runtime(e: datavalue::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// The exact enumerator is gated on the player count; violating it is a
/// configuration mistake, not a runtime failure.
fn check_exact_guard(p: &Prepared) -> Result<(), CliError> {
    if p.config.valuation.method != Method::Exact {
        return Ok(());
    }
    let players = if p.train.groups().is_some() {
        p.train.num_groups()
    } else {
        p.train.len()
    };
    if players > EXACT_MAX_PLAYERS {
        return Err(CliError::Config(format!(
            "exact valuation is limited to {EXACT_MAX_PLAYERS} players, got {players}; \
             use mc/tmc or group the sources"
        )));
    }
    Ok(())
}

fn progress_printer() -> impl FnMut(datavalue::valuation::WindowProgress) {
    |w: datavalue::valuation::WindowProgress| {
        println!(
            "window: {} permutations done, converged: {}",
            w.iteration, w.converged
        );
    }
}

fn run_valuation(
    p: &Prepared,
    train: &Dataset,
    ev: &Evaluator,
    cfg: &ValuationConfig,
) -> Result<ValuationResult, CliError> {
    let mut progress = progress_printer();
    compute_values(train, &p.config.learner, ev, cfg, Some(&mut progress)).map_err(runtime)
}

fn write_history_csv(dir: &Path, result: &ValuationResult) -> Result<(), CliError> {
    let path = dir.join("history.csv");
    let mut buffer = Vec::new();
    writeln!(buffer, "iteration,source_index,running_value")
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (iteration, values) in &result.history {
        for (i, v) in values.iter().enumerate() {
            writeln!(buffer, "{iteration},{i},{v}").map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    std::fs::write(&path, buffer)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

/// `value`: per-source values plus history and manifest.
pub fn cmd_value(config: crate::config::RunConfig) -> Result<(), CliError> {
    let p = prepare(config)?;
    check_exact_guard(&p)?;
    let tolerance = resolve_truncation(&p)?;
    let mut cfg = valuation_config(&p, tolerance);
    if cfg.method == Method::Gshapley && cfg.alpha.is_none() {
        let (alpha, _) = search_one_pass_alpha(
            &p.config.learner,
            &p.train,
            &p.evaluator,
            &p.config.workflows.grid,
            p.config.workflows.grid_passes,
            p.config.seed,
        )
        .map_err(runtime)?;
        println!("grid search selected alpha = {alpha}");
        cfg.alpha = Some(alpha);
    }
    let result = run_valuation(&p, &p.train, &p.evaluator, &cfg)?;
    let dir = ensure_out_dir(&p)?;
    write_json(&dir, "values.json", &result)?;
    write_history_csv(&dir, &result)?;
    write_manifest(&p, &dir, "value", tolerance)?;
    println!(
        "wrote {} values ({} permutations, converged: {}) to {}",
        result.values.len(),
        result.permutations_used,
        result.converged,
        dir.display()
    );
    Ok(())
}

/// `grid-search`: one-pass accuracy over the configured learning-rate grid.
pub fn cmd_grid_search(config: crate::config::RunConfig) -> Result<(), CliError> {
    let p = prepare(config)?;
    let grid = &p.config.workflows.grid;
    let passes = p.config.workflows.grid_passes;
    let mut scores = Vec::new();
    for &alpha in grid {
        let (_, score) = search_one_pass_alpha(
            &p.config.learner,
            &p.train,
            &p.evaluator,
            &[alpha],
            passes,
            p.config.seed,
        )
        .map_err(runtime)?;
        println!("alpha {alpha}: one-pass score {score:.4}");
        scores.push((alpha, score));
    }
    let best = scores
        .iter()
        .cloned()
        .fold(None::<(f64, f64)>, |acc, (a, s)| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((a, s)),
        })
        .expect("grid validated nonempty");

    #[derive(Serialize)]
    struct GridReport {
        grid: Vec<GridEntry>,
        best_alpha: f64,
        best_score: f64,
        passes: usize,
    }
    #[derive(Serialize)]
    struct GridEntry {
        alpha: f64,
        score: f64,
    }
    let dir = ensure_out_dir(&p)?;
    write_json(
        &dir,
        "grid_search.json",
        &GridReport {
            grid: scores
                .iter()
                .map(|&(alpha, score)| GridEntry { alpha, score })
                .collect(),
            best_alpha: best.0,
            best_score: best.1,
            passes,
        },
    )?;
    write_manifest(&p, &dir, "grid-search", 0.0)?;
    println!("best alpha {} (score {:.4})", best.0, best.1);
    Ok(())
}

pub fn cmd_experiment(config: crate::config::RunConfig, which: Which) -> Result<(), CliError> {
    let p = prepare(config)?;
    check_exact_guard(&p)?;
    match which {
        Which::Flip => experiment_flip(&p),
        Which::Noise => experiment_noise(&p),
        Which::Removal => experiment_removal(&p),
        Which::Addition => experiment_addition(&p),
        Which::Adapt => experiment_adapt(&p),
        Which::Compare => experiment_compare(&p),
    }
}

fn random_values(n: usize, seed: u64, purpose: &str) -> Vec<f64> {
    let mut rng = derive_rng(seed, purpose, 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// The corruption experiments value individual points; any group assignment
/// on the training split is dropped for them.
fn ungrouped(ds: &Dataset) -> Result<Dataset, CliError> {
    if ds.groups().is_none() {
        return Ok(ds.clone());
    }
    Dataset::new(ds.points().to_vec(), ds.feature_dim(), ds.num_classes()).map_err(runtime)
}

/// Flip a fraction of training labels, value the corrupted set with several
/// estimators, and report how quickly ascending-value inspection finds the
/// flips.
fn experiment_flip(p: &Prepared) -> Result<(), CliError> {
    let points = ungrouped(&p.train)?;
    let (train, report) =
        flip_labels(&points, p.config.workflows.flip_fraction, p.config.seed).map_err(runtime)?;
    let tolerance = resolve_truncation(p)?;
    let base_cfg = valuation_config(p, tolerance);

    let alpha = match base_cfg.alpha {
        Some(a) => a,
        None => {
            search_one_pass_alpha(
                &p.config.learner,
                &train,
                &p.evaluator,
                &p.config.workflows.grid,
                p.config.workflows.grid_passes,
                p.config.seed,
            )
            .map_err(runtime)?
            .0
        }
    };

    let mut curves: Vec<(&str, Curve)> = Vec::new();
    let tmc = run_valuation(
        p,
        &train,
        &p.evaluator,
        &ValuationConfig {
            method: Method::Tmc,
            ..base_cfg.clone()
        },
    )?;
    curves.push((
        "tmc",
        inspection_curve(&tmc.values, &report.affected)
            .map_err(runtime)?
            .with_label("tmc"),
    ));
    let g = run_valuation(
        p,
        &train,
        &p.evaluator,
        &ValuationConfig {
            method: Method::Gshapley,
            alpha: Some(alpha),
            ..base_cfg.clone()
        },
    )?;
    curves.push((
        "gshapley",
        inspection_curve(&g.values, &report.affected)
            .map_err(runtime)?
            .with_label("gshapley"),
    ));
    let loo = run_valuation(
        p,
        &train,
        &p.evaluator,
        &ValuationConfig {
            method: Method::Loo,
            ..base_cfg.clone()
        },
    )?;
    curves.push((
        "loo",
        inspection_curve(&loo.values, &report.affected)
            .map_err(runtime)?
            .with_label("loo"),
    ));
    let noise = random_values(train.len(), p.config.seed, "random-inspection");
    curves.push((
        "random",
        inspection_curve(&noise, &report.affected)
            .map_err(runtime)?
            .with_label("random"),
    ));

    let dir = ensure_out_dir(p)?;
    let mark = p.config.workflows.inspect_fraction;
    let mut detection = BTreeMap::new();
    for (name, curve) in &curves {
        write_curve_csv(&dir, &format!("inspection_{name}.csv"), curve)?;
        detection.insert((*name).to_string(), curve.y_near(mark));
    }

    #[derive(Serialize)]
    struct FlipSummary {
        flipped: usize,
        flip_fraction: f64,
        inspect_fraction: f64,
        detection_at_mark: BTreeMap<String, f64>,
        gshapley_alpha: f64,
    }
    write_json(
        &dir,
        "summary.json",
        &FlipSummary {
            flipped: report.affected.len(),
            flip_fraction: p.config.workflows.flip_fraction,
            inspect_fraction: mark,
            detection_at_mark: detection,
            gshapley_alpha: alpha,
        },
    )?;
    write_manifest(p, &dir, "experiment-flip", tolerance)?;
    println!("wrote inspection curves and summary to {}", dir.display());
    Ok(())
}

/// Corrupt a fraction of the features at increasing noise levels and track
/// the mean value of noisy versus clean sources.
fn experiment_noise(p: &Prepared) -> Result<(), CliError> {
    let tolerance = resolve_truncation(p)?;
    let base_cfg = valuation_config(p, tolerance);
    #[derive(Serialize)]
    struct NoiseLevel {
        sigma: f64,
        clean_mean: f64,
        noisy_mean: f64,
        gap: f64,
    }
    let mut levels = Vec::new();
    let points = ungrouped(&p.train)?;
    for &sigma in &p.config.workflows.noise_sigmas {
        let (train, report) = add_feature_noise(
            &points,
            p.config.workflows.noise_fraction,
            sigma,
            p.config.seed,
        )
        .map_err(runtime)?;
        let result = run_valuation(p, &train, &p.evaluator, &base_cfg)?;
        let affected = &report.affected;
        let (mut noisy, mut clean) = (0.0, 0.0);
        for (i, &v) in result.values.iter().enumerate() {
            if affected.contains(i) {
                noisy += v;
            } else {
                clean += v;
            }
        }
        let noisy_mean = noisy / affected.len() as f64;
        let clean_mean = clean / (result.values.len() - affected.len()) as f64;
        levels.push(NoiseLevel {
            sigma,
            clean_mean,
            noisy_mean,
            gap: clean_mean - noisy_mean,
        });
    }
    let dir = ensure_out_dir(p)?;
    let mut csv = String::from("sigma,clean_mean,noisy_mean,gap\n");
    for l in &levels {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            l.sigma, l.clean_mean, l.noisy_mean, l.gap
        ));
    }
    std::fs::write(dir.join("noise_levels.csv"), csv)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    write_json(&dir, "summary.json", &levels)?;
    write_manifest(p, &dir, "experiment-noise", tolerance)?;
    println!("wrote noise-level summary to {}", dir.display());
    Ok(())
}

fn default_step(n: usize, configured: Option<usize>) -> usize {
    configured.unwrap_or_else(|| (n / 50).max(1))
}

/// Remove sources in value order (both directions, plus a random baseline)
/// and track the held-out score.
fn experiment_removal(p: &Prepared) -> Result<(), CliError> {
    let train = ungrouped(&p.train)?;
    let tolerance = resolve_truncation(p)?;
    let cfg = valuation_config(p, tolerance);
    let result = run_valuation(p, &train, &p.evaluator, &cfg)?;
    let spec = &p.config.learner;
    let step = default_step(train.len(), p.config.workflows.step);
    let cap = p.config.workflows.removal_cap;
    let desc = removal_curve(
        &train,
        &result.values,
        ValueOrder::Desc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?;
    let asc = removal_curve(
        &train,
        &result.values,
        ValueOrder::Asc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?;
    let noise = random_values(train.len(), p.config.seed, "random-removal");
    let random = removal_curve(
        &train,
        &noise,
        ValueOrder::Desc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?
    .with_label("removal_random");

    let dir = ensure_out_dir(p)?;
    write_curve_csv(&dir, "removal_desc.csv", &desc)?;
    write_curve_csv(&dir, "removal_asc.csv", &asc)?;
    write_curve_csv(&dir, "removal_random.csv", &random)?;

    #[derive(Serialize)]
    struct RemovalSummary {
        step: usize,
        cap: f64,
        full_score: f64,
        desc_at_20pct: f64,
        asc_at_20pct: f64,
        random_at_20pct: f64,
        eval_heldout_overlap: usize,
    }
    write_json(
        &dir,
        "summary.json",
        &RemovalSummary {
            step,
            cap,
            full_score: desc.ys[0],
            desc_at_20pct: desc.y_near(0.2),
            asc_at_20pct: asc.y_near(0.2),
            random_at_20pct: random.y_near(0.2),
            eval_heldout_overlap: overlap_count(&p.eval, &p.heldout),
        },
    )?;
    write_manifest(p, &dir, "experiment-removal", tolerance)?;
    println!("wrote removal curves and summary to {}", dir.display());
    Ok(())
}

/// Value a base set, fit the value estimator, rank a (contaminated) pool by
/// estimated value, and track the held-out score while acquiring pool points.
fn experiment_addition(p: &Prepared) -> Result<(), CliError> {
    let n = p.train.len();
    if n < 4 {
        return Err(CliError::Config("training split too small to halve".into()));
    }
    let halves = p.train.split(&[n / 2, n - n / 2]).map_err(runtime)?;
    let (base, pool_clean) = (&halves[0], &halves[1]);
    let (pool, _) = flip_labels(
        pool_clean,
        p.config.workflows.pool_flip_fraction,
        p.config.seed.wrapping_add(1),
    )
    .map_err(runtime)?;

    let tolerance = resolve_truncation(p)?;
    let cfg = valuation_config(p, tolerance);
    let base_values = run_valuation(p, base, &p.evaluator, &cfg)?;
    let est = fit_value_estimator(base, &base_values.values, p.config.workflows.estimator)
        .map_err(runtime)?;
    let predicted = estimate(&est, &pool).map_err(runtime)?;

    let spec = &p.config.learner;
    let step = default_step(pool.len(), p.config.workflows.step);
    let cap = p.config.workflows.addition_cap;
    let desc = addition_curve(
        base,
        &pool,
        &predicted,
        ValueOrder::Desc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?;
    let asc = addition_curve(
        base,
        &pool,
        &predicted,
        ValueOrder::Asc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?;
    let noise = random_values(pool.len(), p.config.seed, "random-addition");
    let random = addition_curve(
        base,
        &pool,
        &noise,
        ValueOrder::Desc,
        spec,
        &p.heldout_evaluator,
        step,
        cap,
    )
    .map_err(runtime)?
    .with_label("addition_random");

    let dir = ensure_out_dir(p)?;
    write_curve_csv(&dir, "addition_desc.csv", &desc)?;
    write_curve_csv(&dir, "addition_asc.csv", &asc)?;
    write_curve_csv(&dir, "addition_random.csv", &random)?;

    #[derive(Serialize)]
    struct AdditionSummary {
        base_size: usize,
        pool_size: usize,
        pool_flip_fraction: f64,
        base_score: f64,
        desc_at_20pct: f64,
        asc_at_20pct: f64,
        random_at_20pct: f64,
    }
    write_json(
        &dir,
        "summary.json",
        &AdditionSummary {
            base_size: base.len(),
            pool_size: pool.len(),
            pool_flip_fraction: p.config.workflows.pool_flip_fraction,
            base_score: desc.ys[0],
            desc_at_20pct: desc.y_near(0.2),
            asc_at_20pct: asc.y_near(0.2),
            random_at_20pct: random.y_near(0.2),
        },
    )?;
    write_manifest(p, &dir, "experiment-addition", tolerance)?;
    println!("wrote addition curves and summary to {}", dir.display());
    Ok(())
}

/// Contaminate the source labels, value them against the clean target
/// evaluator, then drop negative-value sources and reweight the rest.
fn experiment_adapt(p: &Prepared) -> Result<(), CliError> {
    let points = ungrouped(&p.train)?;
    let (source, _) = flip_labels(
        &points,
        p.config.workflows.adapt_flip_fraction,
        p.config.seed,
    )
    .map_err(runtime)?;
    let tolerance = resolve_truncation(p)?;
    let cfg = valuation_config(p, tolerance);
    let result = run_valuation(p, &source, &p.evaluator, &cfg)?;
    let weights = adapt_reweight(&result.values).map_err(runtime)?;

    let spec = &p.config.learner;
    let n = source.len();
    let baseline_model = fit(spec, &source, &SourceSet::full(n), None).map_err(runtime)?;
    let baseline_score = evaluate(&baseline_model, &p.heldout_evaluator)
        .map_err(runtime)?
        .0;
    let kept: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
    let kept_weights: Vec<f64> = kept.iter().map(|&i| weights[i]).collect();
    let dropped = n - kept.len();
    let reweighted_model = fit(
        spec,
        &source,
        &SourceSet::new(kept, n).map_err(runtime)?,
        Some(&kept_weights),
    )
    .map_err(runtime)?;
    let reweighted_score = evaluate(&reweighted_model, &p.heldout_evaluator)
        .map_err(runtime)?
        .0;

    let dir = ensure_out_dir(p)?;
    #[derive(Serialize)]
    struct AdaptSummary {
        baseline_score: f64,
        reweighted_score: f64,
        dropped_sources: usize,
        positive_sources: usize,
        contamination: f64,
    }
    write_json(
        &dir,
        "summary.json",
        &AdaptSummary {
            baseline_score,
            reweighted_score,
            dropped_sources: dropped,
            positive_sources: n - dropped,
            contamination: p.config.workflows.adapt_flip_fraction,
        },
    )?;
    write_manifest(p, &dir, "experiment-adapt", tolerance)?;
    println!(
        "baseline {baseline_score:.4} -> reweighted {reweighted_score:.4} ({} sources dropped)",
        dropped
    );
    Ok(())
}

/// Value the same training data under each learner kind and report the
/// Spearman rank correlation matrix of the resulting values.
fn experiment_compare(p: &Prepared) -> Result<(), CliError> {
    let tolerance = resolve_truncation(p)?;
    let cfg = valuation_config(p, tolerance);
    let kinds = [
        LearnerKind::LogisticRegression,
        LearnerKind::NaiveBayes,
        LearnerKind::Knn,
    ];
    let mut all_values = Vec::new();
    for kind in kinds {
        let spec = LearnerSpec {
            kind,
            ..p.config.learner.clone()
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let mut progress = progress_printer();
        let result = compute_values(&p.train, &spec, &p.evaluator, &cfg, Some(&mut progress))
            .map_err(runtime)?;
        println!(
            "{}: {} values, {} permutations",
            kind.name(),
            result.values.len(),
            result.permutations_used
        );
        all_values.push(result.values);
    }
    let mut matrix = vec![vec![0.0; kinds.len()]; kinds.len()];
    for i in 0..kinds.len() {
        for j in 0..kinds.len() {
            matrix[i][j] = rank_correlation(&all_values[i], &all_values[j]).map_err(runtime)?;
        }
    }
    let dir = ensure_out_dir(p)?;
    #[derive(Serialize)]
    struct CompareSummary {
        kinds: Vec<&'static str>,
        spearman: Vec<Vec<f64>>,
        players: usize,
    }
    write_json(
        &dir,
        "summary.json",
        &CompareSummary {
            kinds: kinds.iter().map(|k| k.name()).collect(),
            spearman: matrix,
            players: all_values[0].len(),
        },
    )?;
    write_manifest(p, &dir, "experiment-compare", tolerance)?;
    println!("wrote cross-model comparison to {}", dir.display());
    Ok(())
}
