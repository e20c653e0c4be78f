use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shadowlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
    "model": "predator-prey",
    "eps_list": [0.1, 0.05],
    "alpha": 1.0,
    "solver": { "N": 16, "dt": 0.01, "T_cap": 1.0 },
    "stability": { "probe_count": 3, "T_probe": 1.0 },
    "seed": 7
}"#;

#[test]
fn models_list_names_builtins() {
    let out = shadowlab(&["models", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("predator-prey"));
    assert!(text.contains("linear-growth"));
}

#[test]
fn unknown_key_reports_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{ "model": "predator-prey", "eps_list": [0.1], "solver": { "N": 16, "steps": 3 } }"#);
    let out = shadowlab(&["error-sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("/solver/steps"), "{err}");
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn error_sweep_writes_outputs_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = shadowlab(&["error-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let results = std::fs::read_to_string(a.join("results.csv")).unwrap();
    assert_eq!(results, std::fs::read_to_string(b.join("results.csv")).unwrap());
    assert_eq!(results.lines().count(), 3);
    assert!(results.starts_with("epsilon,T,"));
    let rates: Value = serde_json::from_str(&std::fs::read_to_string(a.join("rates.json")).unwrap()).unwrap();
    assert_eq!(rates["model"], "predator-prey");
    assert_eq!(rates["failed_rows"].as_array().unwrap().len(), 0);
}

#[test]
fn stability_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = shadowlab(&["stability", "--config", &cfg, "--out", dir.path().to_str().unwrap(), "--final-state"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("stability.json")).unwrap()).unwrap();
    assert_eq!(v["jacobian"], "final_state");
    assert!(v["spectral_bound"].is_number());
    assert_eq!(v["evolution_fit"]["probe_rates"].as_array().unwrap().len(), 3);
}
