use std::fs;
use std::process::Command;

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecmc-lab"))
}

#[test]
fn success_prints_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["sigma-curve", "--seed", "3", "--out"])
        .arg(dir.path())
        .args(["--set", "sigma_curve.points=25"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["report"]["experiment"], "sigma_curve");
    let csv = fs::read_to_string(dir.path().join("sigma_curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn failure_exits_nonzero_with_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab()
        .args(["ess-scan", "--replicates", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["status"], "error");
    assert_eq!(err["experiment"], "ess_scan");
    assert!(err["error"].as_str().unwrap().contains("replicates"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"experiment": "ess_scan", "replicates": 30, "dims": [7], "bm": {"slow_c": 2.0}}"#,
    )
    .unwrap();
    let out = lab()
        .args(["ess-scan", "--dry-run", "--config"])
        .arg(&cfg)
        .args([
            "--replicates",
            "25",
            "--target",
            "student:12",
            "--horizon",
            "5",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["replicates"], 25);
    assert_eq!(v["dims"], serde_json::json!([7]));
    assert_eq!(v["bm"]["slow_c"], 2.0);
    assert_eq!(v["bm"]["fast_factor"], 1.5);
    assert_eq!(v["horizon"], 5.0);
    assert_eq!(
        v["target"],
        serde_json::json!({"kind": "student", "nu": 12.0})
    );
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"experiment": "bm_compare"}"#).unwrap();
    let out = lab()
        .args(["ess-scan", "--dry-run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
}
