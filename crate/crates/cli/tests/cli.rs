//! End-to-end tests of the `datavalue` binary: exit codes, output files,
//! determinism, and the experiment summaries.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_datavalue"))
}

fn base_config(out_dir: &Path) -> Value {
    json!({
        "dataset": {"synthetic": {"n": 200, "dim": 4, "relation": "linear"}},
        "split": {"train": 0.5, "eval": 0.25, "heldout": 0.25},
        "learner": {"kind": "logistic_regression", "epochs": 15, "alpha": 0.3},
        "valuation": {
            "method": "tmc",
            "max_permutations": 60,
            "convergence_window": 20,
            "truncation_tolerance": 0.02,
            "alpha": 0.1,
            "workers": 2
        },
        "workflows": {"grid": [0.05, 0.1], "grid_passes": 2},
        "seed": 5,
        "output_dir": out_dir
    })
}

fn write_config(dir: &Path, config: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn value_writes_finite_values_history_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    run_ok(&["--config", config.to_str().unwrap(), "value"]);

    let values: Value = read_json(&out.join("values.json"));
    let entries = values["values"].as_array().unwrap();
    assert_eq!(entries.len(), 100); // half of the 200 synthetic rows
    assert!(entries.iter().all(|v| v.as_f64().unwrap().is_finite()));
    assert_eq!(values["method"], "tmc");
    assert_eq!(values["n"], 100);

    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(history.starts_with("iteration,source_index,running_value"));
    assert!(history.lines().count() > 1);

    let manifest: Value = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["n_train"], 100);
    assert!(manifest["dataset_digests"]["train"].is_string());
    assert!(manifest["config"]["valuation"]["max_permutations"] == 60);
}

#[test]
fn value_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write_config(tmp.path(), &base_config(tmp.path()));
    let c = config.to_str().unwrap();
    run_ok(&["--config", c, "--out", out_a.to_str().unwrap(), "value"]);
    run_ok(&["--config", c, "--out", out_b.to_str().unwrap(), "value"]);
    let a = std::fs::read(out_a.join("values.json")).unwrap();
    let b = std::fs::read(out_b.join("values.json")).unwrap();
    assert_eq!(a, b);

    // Worker count must not change the bytes either.
    let out_c = tmp.path().join("c");
    run_ok(&[
        "--config", c,
        "--out", out_c.to_str().unwrap(),
        "--workers", "1",
        "value",
    ]);
    let cbytes = std::fs::read(out_c.join("values.json")).unwrap();
    assert_eq!(a, cbytes);
}

#[test]
fn seed_override_changes_the_values() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let config = write_config(tmp.path(), &base_config(tmp.path()));
    let c = config.to_str().unwrap();
    run_ok(&["--config", c, "--out", out_a.to_str().unwrap(), "value"]);
    run_ok(&["--config", c, "--out", out_b.to_str().unwrap(), "--seed", "99", "value"]);
    let a = read_json(&out_a.join("values.json"));
    let b = read_json(&out_b.join("values.json"));
    assert_ne!(a["values"], b["values"]);
    assert_eq!(b["seed"], 99);
}

#[test]
fn exact_guard_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = base_config(&tmp.path().join("out"));
    config["dataset"] = json!({"synthetic": {"n": 50, "dim": 4, "relation": "linear"}});
    config["valuation"]["method"] = json!("exact");
    let path = write_config(tmp.path(), &config);
    let output = bin()
        .args(["--config", path.to_str().unwrap(), "value"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("exact"), "stderr: {stderr}");
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    // Missing config file.
    let output = bin()
        .args(["--config", "/no/such/config.json", "value"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Unknown field.
    let path = tmp.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dataset": {"synthetic": {"n": 20, "dim": 2, "relation": "linear"}}, "bogus": 1}"#,
    )
    .unwrap();
    let output = bin()
        .args(["--config", path.to_str().unwrap(), "value"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // Referenced csv does not exist.
    let mut config = base_config(&tmp.path().join("out"));
    config["dataset"] = json!({"csv": {"path": "/no/such/data.csv", "label_column": "y"}});
    let path = write_config(tmp.path(), &config);
    let output = bin()
        .args(["--config", path.to_str().unwrap(), "value"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn commands_do_not_mutate_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("data.csv");
    let mut rows = String::from("f1,f2,y\n");
    for i in 0..120 {
        let a = (i as f64 * 0.37).sin();
        let b = (i as f64 * 0.71).cos();
        let y = if a + b > 0.0 { "pos" } else { "neg" };
        rows.push_str(&format!("{a},{b},{y}\n"));
    }
    std::fs::write(&csv, &rows).unwrap();
    let mut config = base_config(&tmp.path().join("out"));
    config["dataset"] = json!({"csv": {"path": csv, "label_column": "y"}});
    let path = write_config(tmp.path(), &config);
    let before_csv = std::fs::read(&csv).unwrap();
    let before_cfg = std::fs::read(&path).unwrap();
    run_ok(&["--config", path.to_str().unwrap(), "value"]);
    assert_eq!(std::fs::read(&csv).unwrap(), before_csv);
    assert_eq!(std::fs::read(&path).unwrap(), before_cfg);
}

#[test]
fn group_mode_values_groups() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut config = base_config(&out);
    config["dataset"] = json!({
        "synthetic": {"n": 200, "dim": 4, "relation": "linear", "groups": 10}
    });
    let path = write_config(tmp.path(), &config);
    run_ok(&["--config", path.to_str().unwrap(), "value"]);
    let values: Value = read_json(&out.join("values.json"));
    assert_eq!(values["values"].as_array().unwrap().len(), 10);
}

#[test]
fn csv_group_column_drives_group_valuation() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("sites.csv");
    let mut rows = String::from("f1,f2,y,site\n");
    for i in 0..120 {
        let a = (i as f64 * 0.37).sin();
        let b = (i as f64 * 0.71).cos();
        let y = if a + b > 0.0 { 1 } else { 0 };
        let site = ["s1", "s2", "s3"][i % 3];
        rows.push_str(&format!("{a},{b},{y},{site}\n"));
    }
    std::fs::write(&csv, rows).unwrap();
    let out = tmp.path().join("out");
    let mut config = base_config(&out);
    config["dataset"] = json!({"csv": {"path": csv, "label_column": "y", "group_column": "site"}});
    let path = write_config(tmp.path(), &config);
    run_ok(&["--config", path.to_str().unwrap(), "value"]);
    let values: Value = read_json(&out.join("values.json"));
    assert_eq!(values["values"].as_array().unwrap().len(), 3);
}

#[test]
fn per_point_experiments_accept_grouped_datasets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut config = base_config(&out);
    config["dataset"] = json!({
        "synthetic": {"n": 200, "dim": 4, "relation": "linear", "groups": 10}
    });
    let path = write_config(tmp.path(), &config);
    run_ok(&["--config", path.to_str().unwrap(), "experiment", "flip"]);
    let summary: Value = read_json(&out.join("summary.json"));
    // Values (and therefore detection) are per point, not per group.
    assert_eq!(summary["flipped"], 10); // 10% of the 100 training points
}

#[test]
fn experiment_flip_reports_all_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    run_ok(&["--config", config.to_str().unwrap(), "experiment", "flip"]);
    let summary: Value = read_json(&out.join("summary.json"));
    let detection = summary["detection_at_mark"].as_object().unwrap();
    for method in ["tmc", "gshapley", "loo", "random"] {
        assert!(detection.contains_key(method), "missing {method}");
        assert!(out.join(format!("inspection_{method}.csv")).exists());
    }
}

#[test]
fn experiment_adapt_reports_before_and_after() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    run_ok(&["--config", config.to_str().unwrap(), "experiment", "adapt"]);
    let summary: Value = read_json(&out.join("summary.json"));
    assert!(summary["baseline_score"].is_f64());
    assert!(summary["reweighted_score"].is_f64());
}

#[test]
fn experiment_compare_emits_spearman_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    run_ok(&["--config", config.to_str().unwrap(), "experiment", "compare"]);
    let summary: Value = read_json(&out.join("summary.json"));
    assert_eq!(
        summary["kinds"],
        json!(["logistic_regression", "naive_bayes", "knn"])
    );
    let matrix = summary["spearman"].as_array().unwrap();
    assert_eq!(matrix.len(), 3);
    for (i, row) in matrix.iter().enumerate() {
        let row = row.as_array().unwrap();
        assert_eq!(row.len(), 3);
        assert!((row[i].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn experiment_removal_and_addition_write_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    let c = config.to_str().unwrap();
    run_ok(&["--config", c, "experiment", "removal"]);
    for f in ["removal_desc.csv", "removal_asc.csv", "removal_random.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let summary: Value = read_json(&out.join("summary.json"));
    assert!(summary["eval_heldout_overlap"].is_u64());

    run_ok(&["--config", c, "experiment", "addition"]);
    for f in ["addition_desc.csv", "addition_asc.csv", "addition_random.csv"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
}

#[test]
fn grid_search_reports_best_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), &base_config(&out));
    run_ok(&["--config", config.to_str().unwrap(), "grid-search"]);
    let report: Value = read_json(&out.join("grid_search.json"));
    let best = report["best_alpha"].as_f64().unwrap();
    assert!([0.05, 0.1].contains(&best));
    assert_eq!(report["grid"].as_array().unwrap().len(), 2);
}
