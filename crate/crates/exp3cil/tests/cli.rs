//! End-to-end checks of the command-line interface.

use std::path::Path;
use std::process::Command;

fn exp3cil() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exp3cil"))
}

fn smoke_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("smoke.toml");
    let text = r#"
[dataset]
kind = "synthetic"
classes = 4
dim = 6
separation = 5.0
per_class_train = 8
per_class_test = 4

[schedule]
phases = 2
setting = "both"

[grid]
beta = [0.0, 1.0]
gamma = [0.0]
lambda = [0.05]
delta = [0, 1]

[orchestrator]
policy_iters = 3
m2_epochs = 6
local_val_per_class = 1
batch_size = 4
exemplar_budget = 2

[model]
hidden_dim = 8
feature_dim = 4

[run]
seeds = [1]
mode = "online"
"#;
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_smoke_config_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out = dir.path().join("out");
    let started = std::time::Instant::now();
    let status = exp3cil()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(started.elapsed().as_secs() < 60, "smoke run exceeded 60 s");
    assert!(out.join("summary.json").exists());
    assert!(out.join("phases.csv").exists());
    assert!(out.join("trace.csv").exists());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["method"], "online");
    assert!(summary["settings"]["tfh"]["per_seed"].is_array());
}

#[test]
fn run_fixed_mode_via_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out = dir.path().join("out");
    let status = exp3cil()
        .args(["run", "--mode", "fixed", "--beta", "1", "--gamma", "0"])
        .args(["--lambda", "0.05", "--delta", "1", "--setting", "tfs"])
        .args(["--seeds", "1,2"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let method = summary["method"].as_str().unwrap();
    assert!(method.starts_with("fixed["), "method = {method}");
    assert!(summary["settings"].get("tfh").is_none());
    assert_eq!(summary["settings"]["tfs"]["per_seed"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_config_names_the_path() {
    let output = exp3cil()
        .args(["run", "--config", "/nonexistent/conf.toml"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("/nonexistent/conf.toml"),
        "stderr did not name the path: {stderr}"
    );
}

#[test]
fn unknown_config_key_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[dataset]\nbogus = 3\n").unwrap();
    let output = exp3cil().args(["run", "--config"]).arg(&path).output().unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("bogus"), "stderr: {stderr}");
}

#[test]
fn compare_merges_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert!(exp3cil()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_a)
        .status()
        .unwrap()
        .success());
    assert!(exp3cil()
        .args(["run", "--mode", "fixed", "--beta", "0", "--gamma", "0"])
        .args(["--lambda", "0.05", "--delta", "0", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap()
        .success());

    let cmp_dir = dir.path().join("cmp");
    let output = exp3cil()
        .arg("compare")
        .arg(out_a.join("summary.json"))
        .arg(out_b.join("summary.json"))
        .arg("--out")
        .arg(&cmp_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("online"), "stdout: {stdout}");
    assert!(cmp_dir.join("comparison.csv").exists());
    assert!(cmp_dir.join("comparison.json").exists());
    assert!(cmp_dir.join("curves.csv").exists());
}

#[test]
fn reruns_reproduce_phases_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = smoke_config(dir.path());
    let run = |out: &Path| {
        assert!(exp3cil()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
        std::fs::read(out.join("phases.csv")).unwrap()
    };
    let first = run(&dir.path().join("r1"));
    let second = run(&dir.path().join("r2"));
    assert_eq!(first, second);
}
