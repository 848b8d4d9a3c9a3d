use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_airy-lab");

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(BIN)
        .arg("run")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn read_csv(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(dir.join("out").join(format!("{name}.csv"))).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn read_json(dir: &Path, name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{name}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn list_is_sorted_and_complete() {
    let out = Command::new(BIN).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let ids: Vec<&str> = lines.iter().map(|l| l.split('\t').next().unwrap()).collect();
    let mut want = vec![
        "lemma1", "cor_b1", "cor_b2_204", "fs20", "lemma2", "cor_t1c", "lemma3", "cor_t2c", "lemma4", "cor_t3c",
        "theorem2", "norm-suite", "exponents", "resonant-integral", "solve", "lifespan",
    ];
    want.sort();
    assert_eq!(ids, want);
    for l in &lines {
        let cols: Vec<&str> = l.split('\t').collect();
        assert_eq!(cols.len(), 3, "{l}");
        assert!(!cols[1].is_empty() && !cols[2].is_empty(), "{l}");
    }
    for (id, anchor) in [("lemma3", "Lemma 3"), ("theorem2", "Theorem 2"), ("cor_b1", "Corollary 1"), ("solve", "Theorem 1")] {
        let l = lines.iter().find(|l| l.starts_with(&format!("{id}\t"))).unwrap();
        assert!(l.contains(anchor), "{l}");
    }
}

#[test]
fn probe_defaults_write_the_frozen_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), r#"{"experiment": "probe", "spec": {"id": "lemma1"}}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(dir.path(), "probe");
    assert_eq!(header, ["estimate_id", "r", "s", "b", "grid_n", "max_ratio", "growth", "verdict"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[4].as_str()).collect::<Vec<_>>(), ["64", "128", "256"]);
    assert!(rows.iter().all(|r| r[0] == "lemma1" && r[7] == "PASS"));
    assert!(rows[0][6].is_empty() && rows[1][6].parse::<f64>().unwrap() < 1.2);
    let j = read_json(dir.path(), "probe");
    assert_eq!(j["detail"]["report"]["samples"].as_array().unwrap().len(), 150);
    assert_eq!(j["pass"], true);
}

#[test]
fn zero_data_solve_converges_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), r#"{"experiment": "solve", "data": {"kind": "zero"}}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = read_csv(dir.path(), "solve");
    assert_eq!(rows.len(), 1);
    let col = |name: &str| &rows[0][header.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("verdict"), "converged");
    assert_eq!(col("iterations"), "1");
}

#[test]
fn lifespan_json_has_pairs_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), r#"{"experiment": "lifespan"}"#, &["--grid-n", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = read_json(dir.path(), "lifespan");
    let pts = j["detail"]["report"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 6);
    assert!(pts.iter().all(|p| p["norm"].as_f64().unwrap() > 0.0 && p["delta_star"].as_f64().unwrap() > 0.0));
    let slope = j["detail"]["report"]["slope"].as_f64().unwrap();
    assert!((-5.2..=-2.8).contains(&slope), "{slope}");
    assert_eq!(j["config"]["grid"]["n"], 64);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["{", r#"{"experiment": "solve", "unknown": 0}"#, r#"{"experiment": "nope"}"#] {
        let out = run(dir.path(), bad, &[]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
    }
    let out = run(dir.path(), r#"{"experiment": "solve"}"#, &["--override", "novalue"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = Command::new(BIN).args(["run", "/nonexistent/config.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let usage = Command::new(BIN).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn hypothesis_rejection_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "solve", "solver": {"params": {"r": 2.0, "s": 0.1, "b": 0.6}, "delta": 0.1}}"#;
    let out = run(dir.path(), cfg, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s >= s(r)"));
    let j = read_json(dir.path(), "solve");
    assert!(j["error"].as_str().unwrap().contains("hypothesis"));
    let out = run(dir.path(), r#"{"experiment": "probe", "spec": {"id": "lemma3", "p": 1.5, "p0": 1.2, "p1": 2.0}}"#, &[]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failures_exit_1_with_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    // verdict failure: the slope bound is out of reach on this range
    let out = run(dir.path(), r#"{"experiment": "resonant-integral", "resonant": {"xi": [8.0, 16.0], "max_slope": -3.0}}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    let (_, rows) = read_csv(dir.path(), "resonant-integral");
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][5], "FAIL");
    // numerical failure: scales spanning less than a decade of norms
    let out = run(dir.path(), r#"{"experiment": "lifespan", "lifespan": {"lambdas": [1.0, 1.1]}}"#, &[]);
    assert_eq!(out.status.code(), Some(1));
    let j = read_json(dir.path(), "lifespan");
    assert_eq!(j["pass"], false);
    assert!(j["error"].as_str().unwrap().contains("decade"));
    // a diverging solve still writes its row
    let big = r#"{"experiment": "solve", "data": {"kind": "gaussian", "amplitude": 6.0}}"#;
    let out = run(dir.path(), big, &[]);
    assert_eq!(out.status.code(), Some(1));
    let (header, rows) = read_csv(dir.path(), "solve");
    let v = header.iter().position(|h| h == "verdict").unwrap();
    assert_ne!(rows[0][v], "converged");
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        r#"{"experiment": "norm-suite", "seed": 1}"#,
        &["--seed", "9", "--grid-n", "128", "--override", "norms.s=[0.5]", "--override", "data.width=1.5"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(dir.path(), "norm-suite");
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert!(rows.iter().all(|r| r[col("seed")] == "9" && r[col("grid")] == "nx128-L40"));
    assert_eq!(rows.iter().filter(|r| r[col("check")] == "quadrature").count(), 3);
    assert!(rows.iter().all(|r| r[col("verdict")] == "PASS"));
    let j = read_json(dir.path(), "norm-suite");
    assert_eq!(j["config"]["data"]["width"], 1.5);
    let probe = run(dir.path(), r#"{"experiment": "probe"}"#, &["--grid-n", "128", "--override", "family.count=4"]);
    assert_eq!(probe.status.code(), Some(0));
    let (_, rows) = read_csv(dir.path(), "probe");
    assert_eq!(rows.iter().map(|r| r[4].as_str()).collect::<Vec<_>>(), ["32", "64", "128"]);
}

#[test]
fn repeated_runs_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": "probe", "spec": {"id": "lemma2"}, "family": {"kind": "random_phase", "count": 8}}"#;
    let bytes = |seed: &str| {
        let out = run(dir.path(), cfg, &["--seed", seed]);
        assert!(out.status.code().is_some());
        std::fs::read(dir.path().join("out/probe.csv")).unwrap()
    };
    let a = bytes("11");
    assert_eq!(a, bytes("11"));
    assert_ne!(a, bytes("12"));
}
