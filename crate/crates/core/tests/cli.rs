use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const QUAD_2: &str = r#"{"n": 1, "polys": [[{"c": [1, 0], "e": [2]}, {"c": [-2, 0], "e": [0]}]]}"#;
const TO_SQRT10: &str = r#"{"start": {"n": 1, "polys": [[{"c": [1, 0], "e": [2]}, {"c": [-1, 0], "e": [0]}]]},
    "target": {"n": 1, "polys": [[{"c": [1, 0], "e": [2]}, {"c": [-10, 0], "e": [0]}]]},
    "gamma": [0.6, 0.8]}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_krawczyk-track")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_reports_verdict_and_exit_status() {
    let dir = TempDir::new().unwrap();
    let sys = write(&dir, "sys.json", QUAD_2);
    let pt = write(&dir, "pt.json", "[[1.5, 0]]");
    let ok = run(&["certify", "--system", &sys, "--point", &pt, "--radius", "0.2", "--rho", "0.875"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert!((v["norm"].as_f64().unwrap() - 0.136667).abs() < 1e-5);

    let tight = run(&["certify", "--system", &sys, "--point", &pt, "--radius", "0.2", "--rho", "0.125"]);
    assert_eq!(tight.status.code(), Some(1));

    let wrong_dim = write(&dir, "pt2.json", "[[1.5, 0], [0, 0]]");
    let bad = run(&["certify", "--system", &sys, "--point", &wrong_dim, "--radius", "0.2"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("coordinates"));
}

#[test]
fn track_writes_one_result_per_start() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "h.json", TO_SQRT10);
    let starts = write(&dir, "starts.json", "[[[1, 0]], [[-1, 0]]]");
    let out = dir.path().join("out.json");
    for mode in ["apriori", "adaptive"] {
        let o = run(&["track", "--homotopy", &h, "--starts", &starts, "--mode", mode, "--out", path_str(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        let results = v.as_array().unwrap();
        assert_eq!(results.len(), 2);
        for (k, res) in results.iter().enumerate() {
            assert_eq!(res["path_id"], k);
            let fin = &res["trace"]["final"];
            let x = fin["x"][0][0].as_f64().unwrap();
            let r = fin["r"].as_f64().unwrap();
            let root = if k == 0 { 10f64.sqrt() } else { -10f64.sqrt() };
            assert!((x - root).abs() <= r, "path {k} ends at {x}");
            assert_eq!(res["trace"]["mode"], mode);
        }
    }
}

#[test]
fn track_records_failed_paths() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "h.json", TO_SQRT10);
    let starts = write(&dir, "starts.json", "[[[1, 0], [0, 0]]]");
    let o = run(&["track", "--homotopy", &h, "--starts", &starts]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[0]["error"].is_string());
    assert!(v[0].get("trace").is_none());
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("k.csv");
    let json = dir.path().join("k.json");
    let o = run(&[
        "bench", "--suite", "katsura", "--min", "2", "--max", "2", "--threads", "1", "--verify", "--out",
        path_str(&csv), "--json", path_str(&json),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("label,path_id,mode,iterations,steps,dt_min,dt_median,r_min,avg_r_ratio,eta_max,success")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 11 && r[0] == "katsura2" && r[10] == "true"));
    assert_eq!(rows.iter().filter(|r| r[2] == "apriori").count(), 2);

    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["summary"].as_array().unwrap().len(), 2);
    assert_eq!(v["reports"].as_array().unwrap().len(), 4);
    assert!(v["reports"][0]["bound_satisfied"].as_bool().unwrap());
}

#[test]
fn validate_univariate_prints_ratios() {
    let o = run(&["validate-univariate", "--m", "10,100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,steps,iterations,radius,L,ratio"));
    let ratios: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios.len(), 2);
    assert!(ratios.iter().all(|r| (1.0..2.0).contains(r)));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    let o = run(&["certify", "--system", path_str(&missing), "--point", path_str(&missing), "--radius", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
    assert_eq!(run(&["bench", "--suite", "cyclic"]).status.code(), Some(2));
    assert_eq!(run(&["bench", "--suite", "katsura", "--min", "5", "--max", "3"]).status.code(), Some(2));
    let bad = write(&dir, "bad.json", "{not json");
    let o = run(&["track", "--homotopy", &bad, "--starts", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["validate-univariate", "--m", "0.5"]).status.code(), Some(2));
}
