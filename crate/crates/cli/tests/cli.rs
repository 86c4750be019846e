use std::path::Path;
use std::process::{Command, Output};

fn newstag(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newstag"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path) {
    let o = newstag(dir, &["synth", "--hashtags", "200", "--news", "120", "--seed", "1", "--out", "c.jsonl"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn run_with_protocol_flags() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = newstag(
        dir.path(),
        &["run", "--input", "c.jsonl", "--mu", "0.4", "--k1", "10", "--k2", "5", "--train-fraction", "0.8", "--seed", "7", "--out", "report.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["method"], "newstag");
    assert_eq!(report["repetitions"].as_array().unwrap().len(), 10);
    assert_eq!(report["dispersion"], "sample_std");
    let echo: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json.config.json")).unwrap()).unwrap();
    assert_eq!(echo["effective"]["experiment"]["seed"], 7);
    assert_eq!(echo["effective"]["experiment"]["propagation"]["max_iterations"], 5);
}

#[test]
fn bad_mu_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = newstag(dir.path(), &["run", "--input", "c.jsonl", "--mu", "1.5", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).trim(), "error: mu must be in (0,1)");
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn unknown_flags_and_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["frobnicate"][..], &["run", "--nope"][..]] {
        let o = newstag(dir.path(), args);
        assert_eq!(o.status.code(), Some(1));
        assert_eq!(stderr(&o).trim().lines().count(), 1);
    }
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = newstag(dir.path(), &["validate", "--input", "absent.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.jsonl"), "{\"id\":\"a\"}\nnot json\n").unwrap();
    let o = newstag(dir.path(), &["validate", "--input", "bad.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
    let o = newstag(dir.path(), &["validate", "--input", "bad.jsonl", "--lenient"]);
    assert!(o.status.success());
}

#[test]
fn inputs_are_never_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let before = std::fs::read(dir.path().join("c.jsonl")).unwrap();
    let o = newstag(dir.path(), &["analyze", "purity", "--input", "c.jsonl", "--out", "c.jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read(dir.path().join("c.jsonl")).unwrap(), before);
}

#[test]
fn synth_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["synth", "--hashtags", "800", "--news", "500", "--purity", "0.9", "--seed", "1", "--out"];
    let a = newstag(dir.path(), &[&args[..], &["a.jsonl"]].concat());
    let b = newstag(dir.path(), &[&args[..], &["b.jsonl"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a.jsonl")).unwrap(),
        std::fs::read(dir.path().join("b.jsonl")).unwrap()
    );
}

#[test]
fn thread_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_newstag"))
        .current_dir(dir.path())
        .env("NEWSTAG_THREADS", "zero")
        .args(["analyze", "purity", "--input", "c.jsonl", "--out", "p.csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
