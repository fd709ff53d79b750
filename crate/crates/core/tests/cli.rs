use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qnls(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnls"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn latest(out: &Path) -> String {
    fs::read_to_string(out.join("latest/report.json")).expect("report written")
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--quiet", "--seed", "7", "verify", "charges", "--n", "3", "--samples", "4"];
    assert_eq!(qnls(dir.path(), &args).status.code(), Some(0));
    let first = latest(dir.path());
    assert_eq!(qnls(dir.path(), &args).status.code(), Some(0));
    assert_eq!(first, latest(dir.path()));
    let stamped = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(stamped, 3, "two stamped runs plus latest");
}

#[test]
fn corrupted_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "seed = 1\nsamples = many\n").unwrap();
    let out = dir.path().join("out");
    let o = qnls(&out, &["--config", cfg.to_str().unwrap(), "run", "all"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn config_selects_a_partial_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("partial.conf");
    fs::write(&cfg, "# charges only\nsuites = charges\nn = 5\nsamples = 2\ncomposition_samples = 10\ng4 = false\n").unwrap();
    let out = dir.path().join("out");
    let o = qnls(&out, &["--config", cfg.to_str().unwrap(), "--json", "run", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["id"].as_str().unwrap().starts_with("charges.")));
    assert!(checks.iter().any(|c| c["id"] == "charges.interior.n5.H4"));
    assert_eq!(latest(&out), String::from_utf8_lossy(&o.stdout));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["--mode", "symbolic", "run", "all"][..],
        &["bethe", "solve", "--coupling", "-1"],
        &["lattice", "commute", "--n", "3", "--cutoff", "3"],
        &["frobnicate"],
    ] {
        let o = qnls(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bethe_solve_prints_a_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(dir.path(), &["--json", "bethe", "solve", "--n", "3", "--quantum-numbers", "-1,0,2"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    assert!(report["data"]["bethe.solution"].is_object());
    assert!(String::from_utf8_lossy(&o.stderr).contains("report written to"));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = qnls(dir.path(), &["bethe", "solve", "--n", "5", "--coupling", "1e-30", "--box", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(dir.path().join("latest/report.md").exists());
}
