use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_corona-lab"));
    cmd.args(args);
    if let Some(text) = config {
        let path = dir.join("config.json");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

const REGIME_S: &str = r#"{"mode": "direct", "n": 2, "c": 0.25, "d": 0.01, "samples": 1000}"#;
const REGIME_P: &str = r#"{"delta": 0.5, "M": 2, "samples": 1000}"#;

#[test]
fn params_pass_and_forced_n_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = lab(&["params"], Some(REGIME_P), dir.path());
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["result"]["params"]["n"], 5);
    assert_eq!(v["result"]["validation"]["pass"], true);
    let forced = lab(&["params"], Some(r#"{"delta": 0.5, "M": 2, "n": 4}"#), dir.path());
    assert_eq!(forced.status.code(), Some(3));
}

#[test]
fn malformed_and_unknown_configs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = lab(&["certify"], Some("{\"delta\": 0.5,"), dir.path());
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("malformed config"));
    let unknown = lab(&["certify"], Some(r#"{"delta": 0.5, "M": 2, "colour": 1}"#), dir.path());
    assert_eq!(unknown.status.code(), Some(3));
    let order = lab(&["certify"], Some(r#"{"mode": "direct", "n": 2, "c": 0.01, "d": 0.25}"#), dir.path());
    assert_eq!(order.status.code(), Some(3));
    let missing = lab(&["certify", "--config", "/nonexistent/cfg.json"], None, dir.path());
    assert_eq!(missing.status.code(), Some(3));
}

#[test]
fn certify_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["certify"], Some(REGIME_P), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let paper = v["result"]["lb_paper"].as_f64().unwrap();
    assert!((paper - 7.7419).abs() < 1e-3);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"lb_sharp\": 1.1456856246026332e1"));
    let s = lab(&["certify"], Some(REGIME_S), dir.path());
    let v: serde_json::Value = serde_json::from_slice(&s.stdout).unwrap();
    assert!((v["result"]["lb_sharp"].as_f64().unwrap() - 40.0 / 7.0).abs() < 1e-12);
}

#[test]
fn verify_direct_mode_reports_without_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&["verify", "--samples", "500"], Some(REGIME_S), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["result"]["delta"].is_null());
    assert_eq!(v["config"]["samples"], 500);
    assert_eq!(v["result"]["samples"], 1000);
}

#[test]
fn underflowed_regime_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"delta": 0.9, "M": 1000000}"#;
    assert_eq!(lab(&["params"], Some(cfg), dir.path()).status.code(), Some(0));
    let out = lab(&["verify"], Some(cfg), dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("underflow"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["verify", "solve-corona", "solve-interp", "monodromy"] {
        let a = lab(&[cmd, "--seed", "3"], Some(REGIME_S), dir.path());
        let b = lab(&[cmd, "--seed", "3"], Some(REGIME_S), dir.path());
        assert_eq!(a.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
    let a = lab(&["verify", "--seed", "3"], Some(REGIME_S), dir.path());
    let c = lab(&["verify", "--seed", "4"], Some(REGIME_S), dir.path());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn report_writes_artifacts_with_hash() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let out = lab(&["report", "--out", run.to_str().unwrap()], Some(REGIME_S), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let hash = v["config_hash"].as_str().unwrap().to_string();
    for name in [
        "report.json",
        "params.json",
        "certify.json",
        "verify.json",
        "sweep.csv",
        "trace-check.json",
        "solve-corona.json",
        "solution.json",
        "solve-interp.json",
        "monodromy.json",
        "lifted_contours.csv",
    ] {
        let text = std::fs::read_to_string(run.join(name)).unwrap();
        assert!(text.contains(&hash), "{name} lacks the config hash");
    }
    let missing_out = lab(&["report"], Some(REGIME_S), dir.path());
    assert_eq!(missing_out.status.code(), Some(3));
}
