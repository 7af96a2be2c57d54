//! Shared run plumbing: dataset preparation, splits, manifests, and output
//! files. Every command writes a manifest sufficient to reproduce the run:
//! the resolved config, seeds, and dataset digests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use datavalue::dataset::{generate_synthetic, load_csv, Dataset};
use datavalue::learners::{bootstrap_tolerance, Evaluator};
use datavalue::valuation::{fit_full, ValuationConfig};
use datavalue::workflows::Curve;

use crate::config::{DatasetSource, RunConfig};
use crate::CliError;

pub struct Prepared {
    pub config: RunConfig,
    pub train: Dataset,
    pub eval: Dataset,
    pub heldout: Dataset,
    pub evaluator: Evaluator,
    pub heldout_evaluator: Evaluator,
    pub digests: Digests,
}

#[derive(Debug, Clone, Serialize)]
pub struct Digests {
    pub full: String,
    pub train: String,
    pub eval: String,
    pub heldout: String,
}

fn config_error(e: datavalue::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_error(e: datavalue::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Load or generate the dataset, shuffle it on the master seed, split it by
/// the configured fractions, and assemble the evaluators.
pub fn prepare(config: RunConfig) -> Result<Prepared, CliError> {
    let (full, synthetic_groups) = match &config.dataset {
        DatasetSource::Csv {
            path,
            label_column,
            group_column,
        } => (
            load_csv(path, label_column, group_column.as_deref()).map_err(config_error)?,
            None,
        ),
        DatasetSource::Synthetic {
            n,
            dim,
            relation,
            groups,
        } => (
            generate_synthetic(*n, *dim, *relation, config.seed).map_err(config_error)?,
            *groups,
        ),
    };
    let shuffled = full.shuffled(config.seed);
    let n = shuffled.len();
    let n_train = ((n as f64) * config.split.train).floor() as usize;
    let n_eval = ((n as f64) * config.split.eval).floor() as usize;
    let n_held = ((n as f64) * config.split.heldout).floor() as usize;
    if n_train < 2 || n_eval < 1 || n_held < 1 {
        return Err(CliError::Config(format!(
            "splits too small: train {n_train}, eval {n_eval}, heldout {n_held} of {n} rows"
        )));
    }
    let mut parts = shuffled
        .split(&[n_train, n_eval, n_held])
        .map_err(config_error)?;
    let heldout = parts.pop().expect("three parts");
    let eval = parts.pop().expect("three parts");
    let mut train = parts.pop().expect("three parts");

    // Splitting drops metadata; groups only matter for the players, so they
    // are re-attached to the training split. File-supplied group ids are
    // compacted in case a group landed entirely outside the split.
    let train_groups: Option<Vec<usize>> = if let Some(all) = shuffled.groups() {
        let mut remap: Vec<Option<usize>> = vec![None; shuffled.num_groups()];
        let mut next = 0usize;
        Some(
            all[..n_train]
                .iter()
                .map(|&g| {
                    *remap[g].get_or_insert_with(|| {
                        let id = next;
                        next += 1;
                        id
                    })
                })
                .collect(),
        )
    } else if let Some(g) = synthetic_groups {
        if g > train.len() {
            return Err(CliError::Config(format!(
                "groups {g} exceeds training size {}",
                train.len()
            )));
        }
        // Contiguous, near-equal chunks.
        Some((0..train.len()).map(|i| i * g / train.len()).collect())
    } else {
        None
    };
    if train_groups.is_some() {
        train = Dataset::with_groups(
            train.points().to_vec(),
            train.feature_dim(),
            train.num_classes(),
            train_groups,
        )
        .map_err(config_error)?;
    }

    let evaluator = Evaluator::new(eval.clone(), config.metric).map_err(config_error)?;
    let heldout_evaluator =
        Evaluator::new(heldout.clone(), config.metric).map_err(config_error)?;
    let digests = Digests {
        full: full.digest(),
        train: train.digest(),
        eval: eval.digest(),
        heldout: heldout.digest(),
    };
    Ok(Prepared {
        config,
        train,
        eval,
        heldout,
        evaluator,
        heldout_evaluator,
        digests,
    })
}

/// Truncation tolerance: the bootstrap settings win over a fixed value;
/// absent both, truncation is off.
pub fn resolve_truncation(p: &Prepared) -> Result<f64, CliError> {
    if let Some(bs) = &p.config.valuation.truncation_bootstrap {
        let model = fit_full(&p.train, &p.config.learner).map_err(runtime_error)?;
        return bootstrap_tolerance(&model, &p.evaluator, bs.b, bs.multiplier, p.config.seed)
            .map_err(runtime_error);
    }
    Ok(p.config.valuation.truncation_tolerance.unwrap_or(0.0))
}

pub fn valuation_config(p: &Prepared, truncation_tolerance: f64) -> ValuationConfig {
    let v = &p.config.valuation;
    ValuationConfig {
        method: v.method,
        max_permutations: v.max_permutations,
        convergence_threshold: v.convergence_threshold,
        convergence_window: v.convergence_window,
        truncation_tolerance,
        alpha: v.alpha,
        seed: p.config.seed,
        workers: v.workers,
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100_0000_01b3);
    }
    h
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub config_hash: String,
    pub seed: u64,
    pub workers: usize,
    pub resolved_truncation_tolerance: f64,
    pub dataset_digests: &'a Digests,
    pub n_train: usize,
    pub n_eval: usize,
    pub n_heldout: usize,
    pub crate_version: &'a str,
}

pub fn write_manifest(
    p: &Prepared,
    out_dir: &Path,
    command: &str,
    truncation_tolerance: f64,
) -> Result<(), CliError> {
    let config_json = serde_json::to_string(&p.config)
        .map_err(|e| CliError::Runtime(format!("manifest: {e}")))?;
    let manifest = Manifest {
        command,
        config: &p.config,
        config_hash: format!("{:016x}", fnv1a64(config_json.as_bytes())),
        seed: p.config.seed,
        workers: p.config.valuation.workers,
        resolved_truncation_tolerance: truncation_tolerance,
        dataset_digests: &p.digests,
        n_train: p.train.len(),
        n_eval: p.eval.len(),
        n_heldout: p.heldout.len(),
        crate_version: env!("CARGO_PKG_VERSION"),
    };
    write_json(out_dir, "manifest.json", &manifest)
}

pub fn ensure_out_dir(p: &Prepared) -> Result<PathBuf, CliError> {
    let dir = p.config.output_dir.clone();
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
    fs::write(&path, text + "\n")
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

pub fn write_curve_csv(dir: &Path, name: &str, curve: &Curve) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut buffer = Vec::new();
    curve
        .write_csv(&mut buffer)
        .map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
    fs::write(&path, buffer)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

/// Exact duplicate rows shared by two splits; a nonzero count means the
/// held-out data leaks into the valuation evaluator.
pub fn overlap_count(a: &Dataset, b: &Dataset) -> usize {
    use std::collections::HashSet;
    let key = |p: &datavalue::dataset::LabeledPoint| {
        let mut bytes = Vec::with_capacity(p.features.len() * 8 + 8);
        for &x in &p.features {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        bytes.extend_from_slice(&(p.label as u64).to_le_bytes());
        bytes
    };
    let seen: HashSet<Vec<u8>> = a.points().iter().map(key).collect();
    b.points().iter().filter(|p| seen.contains(&key(p))).count()
}
