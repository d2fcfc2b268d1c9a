use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freehilbert")).args(args).output().unwrap()
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_passes_with_exit_zero() {
    let o = run(&["verify", "--identity", "cotlar_amalg", "--trials", "20", "--seed", "4", "--arith", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_out(&o);
    assert_eq!(v["id"], "cotlar_amalg");
    assert_eq!(v["passes"], 20);
    assert_eq!(v["max_residual"], 0.0);
    assert!(v.get("witness").is_none());
}

#[test]
fn corrupted_symbol_exits_one_with_witness() {
    let o = run(&["verify", "--identity", "cotlar_free", "--trials", "3", "--corrupt-symbol"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json_out(&o);
    assert!(v["witness"].is_object());
    assert_eq!(v["pass"], false);
}

#[test]
fn gromov_carre_reports_the_kappa_sweep() {
    let o = run(&["verify", "--identity", "gromov_carre", "--trials", "5", "--arith", "float"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_out(&o)["kappa_sweep"]["kappa"], 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "--identity", "no_such_identity"]).status.code(), Some(2));
    assert_eq!(run(&["experiment", "hilbert_ratio", "--p", "0.5", "--out", "/tmp/unused"]).status.code(), Some(2));
    assert_eq!(run(&["norm", "--p", "3", "--in", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
}

#[test]
fn norm_of_the_free_semicircle_pair() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    fs::write(&x, r#"{"ring":"rational","terms":[{"word":[1],"c":"1"},{"word":[-1],"c":"1"}]}"#).unwrap();
    let m = json_out(&run(&["norm", "--p", "4", "--in", path(&x)]));
    assert!((m["value"].as_f64().unwrap() - 6f64.powf(0.25)).abs() < 1e-12);
    let s = json_out(&run(&["norm", "--p", "4", "--method", "spectral", "--radius", "4", "--in", path(&x)]));
    assert_eq!(s["method"], "spectral");
    assert!((s["value"].as_f64().unwrap() - 6f64.powf(0.25)).abs() < 1e-9);
    assert_eq!(run(&["norm", "--p", "3", "--in", path(&x)]).status.code(), Some(2));
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["experiment", "hilbert_ratio", "--p", "2,4", "--trials", "6", "--seed", "1", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("hilbert_ratio.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("trial,p,terms,maxlen,ratio"));
    assert_eq!(csv.lines().count(), 1 + 12);
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("hilbert_ratio.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "freehilbert.experiment.v1");
    assert_eq!(summary["config"]["trials"], 6);
}

#[test]
fn lock_file_detects_drift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let lock = dir.path().join("lock.json");
    let base = ["experiment", "khintchine", "--p", "4", "--trials", "10", "--out", path(&out), "--lock", path(&lock)];
    let first = run(&[&base[..], &["--seed", "1"]].concat());
    assert_eq!(json_out(&first)["lock"]["status"], "created");
    let again = run(&[&base[..], &["--seed", "1"]].concat());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(json_out(&again)["lock"]["status"], "matched");
    let mut locked: Value = serde_json::from_str(&fs::read_to_string(&lock).unwrap()).unwrap();
    let m = locked["groups"][0]["median"].as_f64().unwrap();
    locked["groups"][0]["median"] = (m * 1.2).into();
    fs::write(&lock, locked.to_string()).unwrap();
    let drift = run(&[&base[..], &["--seed", "1"]].concat());
    assert_eq!(drift.status.code(), Some(1));
    assert_eq!(json_out(&drift)["lock"]["status"], "mismatch");
}

#[test]
fn partition_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["greedy", "powers"] {
        let f = dir.path().join(format!("{kind}.json"));
        let o = run(&["partition", "--kind", kind, "--radius", "3", "--seed", "5", "--out", path(&f)]);
        assert_eq!(o.status.code(), Some(0));
        let part: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
        let words: usize = part["paths"].as_array().unwrap().iter().map(|p| p.as_array().unwrap().len()).sum();
        // |ball_3| - 1 for two generators.
        assert_eq!(words, 4 + 12 + 36);
    }
}
