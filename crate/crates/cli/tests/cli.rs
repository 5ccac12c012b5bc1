use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const S3: &str = "0.5773502691896258";

fn combkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combkit")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn curve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = combkit(&["curve", "--d", "2", "--points", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(&path);
    let rows: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(text.lines().next(), Some("I,D,x,y,F,G,p"));
    assert_eq!(&rows[0][..2], &[0.0, 0.0]);
    assert_eq!(&rows[3][..2], &[1.0, 1.0]);
    let mid = &rows[2];
    let expected = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3f64.sqrt(), 1.0 / 3f64.sqrt(), 5.0 / 6.0, 5.0 / 12.0];
    for (a, b) in mid.iter().zip(expected) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn curve_json_and_upper_branch() {
    let out = combkit(&["curve", "--d", "3", "--points", "5", "--format", "json"]);
    let pts = json(&out);
    assert_eq!(pts.as_array().unwrap().len(), 5);
    let out = combkit(&["curve", "--d", "3", "--points", "3", "--branch", "upper"]);
    let text = String::from_utf8(out.stdout).unwrap();
    // the upper root starts at D = 4/d²
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((first[1].parse::<f64>().unwrap() - 4.0 / 9.0).abs() < 1e-14);
    assert_eq!(first[2], "");
}

#[test]
fn verify_identity_point_is_exact() {
    let out = combkit(&["verify", "--d", "2", "--x", "0", "--samples", "20000", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(num(&r["point"]["f"]), 1.0);
    assert!((num(&r["monte_carlo"]["f"]["mean"]) - 1.0).abs() < 1e-12);
    assert_eq!(r["pass"], Value::Bool(true));
}

#[test]
fn verify_estimation_point_by_weight() {
    let out = combkit(&["verify", "--d", "2", "--p", "1", "--samples", "100000", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let g = &r["monte_carlo"]["g"];
    assert!((num(&g["mean"]) - 0.5).abs() <= (3.0 * num(&g["stderr"])).max(5e-3));
    assert_eq!(r["spec"]["by"], "p");
}

#[test]
fn verify_is_byte_reproducible() {
    let a = combkit(&["verify", "--d", "3", "--info", "0.4", "--samples", "20000", "--seed", "11"]);
    let b = combkit(&["verify", "--d", "3", "--info", "0.4", "--samples", "20000", "--seed", "11", "--threads", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let c = combkit(&["verify", "--d", "3", "--info", "0.4", "--samples", "20000", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_failure_exits_one() {
    // a single sample has no spread, so only the 5e-3 floor applies
    let out = combkit(&["verify", "--d", "2", "--x", S3, "--samples", "1", "--seed", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
}

#[test]
fn realize_identity_and_midpoint() {
    let out = combkit(&["realize", "--d", "2", "--x", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(num(&r["self_check"]["recomposition_residual"]) <= 1e-10);

    let a = combkit(&["realize", "--d", "2", "--x", S3]);
    let r = json(&a);
    assert_eq!(r["ancilla_dims"], serde_json::json!([4, 10]));
    assert_eq!(r["network"]["stages"].as_array().unwrap().len(), 2);
    let stage = &r["network"]["stages"][1]["map"]["matrix"];
    assert_eq!(stage["rows"], 20);
    assert_eq!(stage["cols"], 8);
    assert_eq!(stage["entries"].as_array().unwrap().len(), 160);
    for k in ["d", "x", "y"] {
        assert!(r.get(k).is_some());
    }
    let b = combkit(&["realize", "--d", "2", "--x", S3]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn trajectory_identity_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let out = combkit(&[
        "trajectory",
        "--d",
        "2",
        "--x",
        "0",
        "--samples",
        "25",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = read(&path);
    assert_eq!(text.lines().count(), 25);
    for line in text.lines() {
        let t: Value = serde_json::from_str(line).unwrap();
        assert!((num(&t["conditional_fidelity"]) - 1.0).abs() < 1e-12);
        for k in ["d", "x", "y", "seed", "u", "uhat", "density", "gain"] {
            assert!(t.get(k).is_some(), "{k}");
        }
    }
}

#[test]
fn trajectory_estimation_point_gain() {
    let out = combkit(&["trajectory", "--d", "2", "--x", "1", "--samples", "20000", "--seed", "4"]);
    let gains: Vec<f64> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| num(&serde_json::from_str::<Value>(l).unwrap()["gain"]))
        .collect();
    let n = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / n;
    let var = gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let t = combkit::network::estimate_fg_trajectories(1.0, 0.0, 2, &combkit::McConfig::new(20_000, 5)).unwrap();
    let k = 3.0 * (var / n + t.g.stderr.powi(2)).sqrt();
    assert!((mean - t.g.mean).abs() <= k, "{mean} vs {:?}", t.g);
}

#[test]
fn trajectory_is_byte_reproducible() {
    let args = ["trajectory", "--d", "3", "--p", "0.3", "--samples", "40", "--seed", "9"];
    assert_eq!(combkit(&args).stdout, combkit(&args).stdout);
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(combkit(&["verify", "--d", "7", "--x", "0"]).status.code(), Some(2));
    assert_eq!(combkit(&["verify", "--d", "2", "--x", "0", "--p", "0.5"]).status.code(), Some(2));
    assert_eq!(combkit(&["verify", "--d", "2"]).status.code(), Some(2));
    assert_eq!(combkit(&["verify", "--d", "2", "--x", "1.5"]).status.code(), Some(2));
    assert_eq!(combkit(&["curve", "--d", "2", "--points", "1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("missing").join("c.csv");
    assert_eq!(combkit(&["curve", "--d", "2", "--out", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(combkit(&["trajectory", "--d", "2", "--x", "0", "--out", bad.to_str().unwrap()]).status.code(), Some(2));
}
