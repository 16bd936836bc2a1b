//! Experiment runner, output files and the command-line driver.

use std::process::Command;

use mlce::experiment::{emit_results, read_trials, run_experiment, ExperimentConfig, Preset, Sweep};
use mlce::SchemeKind;

fn tiny() -> ExperimentConfig {
    let mut config = ExperimentConfig::preset(Preset::Fig2a);
    config.sweep = Sweep::NumUsers(vec![6]);
    config.schemes = vec![SchemeKind::Proposed, SchemeKind::Uncoded];
    config.trials = 2;
    config
}

#[test]
fn outputs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny();
    let outcome = run_experiment(&config).unwrap();
    assert_eq!(outcome.records.len(), 4);

    let (csv, json) = emit_results(&outcome.records, &outcome.aggregates, &config, dir.path()).unwrap();
    let back = read_trials(&csv).unwrap();
    assert_eq!(back.len(), 4);
    for (a, b) in outcome.records.iter().zip(&back) {
        assert_eq!(a.throughput_bps, b.throughput_bps);
        assert_eq!((&a.scheme, a.trial), (&b.scheme, b.trial));
    }

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let cells = summary["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    for cell in cells {
        let scheme = cell["scheme"].as_str().unwrap();
        let values = outcome.throughputs("6", scheme);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        assert!((cell["mean_throughput_bps"].as_f64().unwrap() - mean).abs() <= 1e-9 * mean.max(1.0));
    }
}

#[test]
fn proposed_never_trails_uncoded_in_a_trial() {
    let outcome = run_experiment(&tiny()).unwrap();
    let p = outcome.throughputs("6", "proposed");
    let u = outcome.throughputs("6", "uncoded");
    assert!(p.iter().zip(&u).all(|(a, b)| a >= b));
}

fn simulate() -> Command {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
}

#[test]
fn cli_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"sweep": {"num_users": [5]}}"#).unwrap();
    let status = simulate()
        .args(["--preset", "fig2a", "--trials", "1", "--scheme", "proposed,uncoded", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = simulate().args(["--preset", "fig9"]).output().unwrap();
    assert!(!bad.status.success());

    let config = dir.path().join("bad.json");
    std::fs::write(&config, r#"{"num_userz": 4}"#).unwrap();
    let out = simulate().arg("--config").arg(&config).arg("--out").arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(!dir.path().join("trials.csv").exists());
}
