use std::path::{Path, PathBuf};
use std::process::Command;

use wavefield_anc::ExperimentConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavefield-anc"))
}

fn shipped_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/headrest.toml")
}

#[test]
fn shipped_config_is_the_headrest_scenario() {
    let cfg = ExperimentConfig::load(&shipped_config()).unwrap();
    let reference = ExperimentConfig::headrest(0);
    assert_eq!(cfg.resolve().unwrap(), reference.resolve().unwrap());
    assert_eq!(cfg.train, reference.train);
    assert_eq!(cfg.anc, reference.anc);
    assert_eq!(cfg.sweep_radii.len(), reference.sweep_radii.len());
    for (a, b) in cfg.sweep_radii.iter().zip(&reference.sweep_radii) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn validate_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["validate", "--config"])
        .arg(shipped_config())
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("validate.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 9);
}

#[test]
fn config_problems_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["validate", "--config", "/nonexistent/cfg.toml", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    let mut text = std::fs::read_to_string(shipped_config()).unwrap();
    text = text.replace("speed_of_sound = 343.0", "speed_of_sound = -343.0");
    std::fs::write(&bad, text).unwrap();
    let status = bin().args(["field-map", "--config"]).arg(&bad).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin().args(["not-an-experiment", "--config"]).arg(shipped_config()).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn failed_check_exits_with_one_and_still_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["anc-convergence", "--epochs", "0", "--config"])
        .arg(shipped_config())
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let csv = std::fs::read_to_string(dir.path().join("anc_convergence.csv")).unwrap();
    assert!(csv.starts_with("iteration,eps_dB_multipoint,eps_dB_pinn\n"));
    assert_eq!(csv.lines().count(), 10_001);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_passed"], false);
    assert_eq!(summary["config"]["train"]["epochs"], 0);
}

#[test]
fn seed_flag_overrides_both_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["interp-sweep", "--epochs", "20", "--seed", "4", "--config"])
        .arg(shipped_config())
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seeds"]["scenario"], 4);
    assert_eq!(summary["seeds"]["train"], 4);
    let rows = std::fs::read_to_string(dir.path().join("interp_sweep.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("r_s,eps_sh_dB,eps_pinn_dB"));
    assert_eq!(rows.lines().count(), 17);
}

#[test]
fn echoed_config_reproduces_outputs() {
    let first = tempfile::tempdir().unwrap();
    let run = |config: &Path, out: &Path| {
        bin()
            .args(["anc-convergence", "--epochs", "30", "--config"])
            .arg(config)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
    };
    run(&shipped_config(), first.path());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.path().join("summary.json")).unwrap()).unwrap();
    let echo = first.path().join("echo.json");
    std::fs::write(&echo, serde_json::to_string(&summary["config"]).unwrap()).unwrap();

    let second = tempfile::tempdir().unwrap();
    run(&echo, second.path());
    for name in ["anc_convergence.csv", "training_history.csv", "model.txt", "anc_pinn.txt"] {
        let a = std::fs::read(first.path().join(name)).unwrap();
        let b = std::fs::read(second.path().join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
}
