use std::path::Path;
use std::process::{Command, Output};

fn egap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egap")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

const HEADER: &str = "k,tau,beta1,beta2,phi,dual_smoothed,gap_surrogate,feas_norm,rpfgap,rdfgap,e_d,e_p,time_ms";

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let out = egap(&["solve", "--problem", "gen:example1", "--alg", "alg9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_prints_a_summary() {
    let out = egap(&["solve", "--problem", "gen:example1", "--alg", "alg1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    for key in ["instance", "algorithm", "iterations", "stop_reason", "phi", "feas_norm", "time_ms", "seed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["algorithm"], "alg1");
    assert_ne!(v["stop_reason"], "max_iter");
    assert!((v["phi"].as_f64().unwrap() - 5.0).abs() < 0.5);
}

#[test]
fn solve_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = egap(&[
        "solve",
        "--problem",
        "gen:alloc:1:5:2",
        "--alg",
        "alg2",
        "--tau0",
        "0.6",
        "--max-iter",
        "20",
        "--trace",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(csv.lines().next(), Some(HEADER));
    let iterations = stdout_json(&out)["iterations"].as_u64().unwrap() as usize;
    assert_eq!(csv.lines().count(), iterations + 2);
}

#[test]
fn zero_iterations_record_only_the_initial_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = egap(&[
        "solve",
        "--problem",
        "gen:example1",
        "--alg",
        "alg1",
        "--max-iter",
        "0",
        "--trace",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
    assert_eq!(stdout_json(&out)["iterations"], 0);
}

#[test]
fn missing_problem_file_fails() {
    let out = egap(&["solve", "--problem", "does/not/exist.json", "--alg", "alg1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn alg3_on_a_merely_convex_problem_fails() {
    let out = egap(&["solve", "--problem", "gen:example1", "--alg", "alg3"]);
    assert_eq!(out.status.code(), Some(1));
}

fn write_manifest(dir: &Path, body: &str) -> String {
    let path = dir.join("manifest.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn profile_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        r#"{"instances": ["gen:example1", "gen:alloc:2:5:2"], "algorithms": ["alg1", "baseline"], "overrides": {"max_iter": 500}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = egap(&["profile", "--manifest", &manifest, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.json", "profile_iterations.csv", "profile_time.csv"] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let traces = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(traces, 6);
}

#[test]
fn profile_without_output_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), r#"{"instances": ["gen:example1"], "algorithms": ["alg1"]}"#);
    let out = egap(&["profile", "--manifest", &manifest]);
    assert_eq!(out.status.code(), Some(1));
}
