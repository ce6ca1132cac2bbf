use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn carnot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("carnot-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn quaternionic_selftest_passes() {
    let out = carnot(&["group-selftest", "--algebra", "hQ", "--n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["experiment"], "group-selftest");
    assert_eq!(v["version"], carnot_core::VERSION);
    let checks = v["result"]["report"]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "h_type_relations"));
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn euclidean_annulus_constant() {
    let out = carnot(&["crofton-verify", "--space", "euclid", "--n", "2", "--k", "1", "--integrand", "annulus", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let c = json(&out)["result"]["constant"].as_f64().unwrap();
    assert!((c - 1.0 / std::f64::consts::PI).abs() < 1e-12, "{c}");
}

#[test]
fn annulus_fixture_modulus() {
    let out = carnot(&["modulus-solve", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let exact = 2.0 * std::f64::consts::PI / 2f64.ln();
    assert!((r["value"].as_f64().unwrap() / exact - 1.0).abs() < 0.02);
    assert!(r["kkt_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn runs_are_bit_identical_across_thread_counts() {
    let base = ["crofton-verify", "--space", "hR", "--n", "2", "--k", "2", "--integrand", "bump", "--samples", "4000", "--seed", "9"];
    let one = carnot(&base);
    let again = carnot(&base);
    let three = carnot(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let report = scratch("echo.json");
    let args = [
        "crofton-verify", "--space", "hC", "--n", "1", "--kh", "2", "--kv", "1", "--integrand", "gauss",
        "--center=0.3,-0.2,0.1,0,0.4,-0.1", "--sigma", "0.7", "--samples", "2000", "--seed", "4",
    ];
    let first = carnot(&[&args[..], &["--out", report.to_str().unwrap()]].concat());
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(std::fs::read(&report).unwrap(), first.stdout);
    let again = carnot(&["crofton-verify", "--config", report.to_str().unwrap()]);
    assert_eq!(first.stdout, again.stdout);
    // The bare config section works too, and flags override it.
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, json(&first)["config"].to_string()).unwrap();
    let same = carnot(&["crofton-verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first.stdout, same.stdout);
    let other = json(&carnot(&["crofton-verify", "--config", cfg.to_str().unwrap(), "--seed", "5"]));
    assert_eq!(other["config"]["seed"], 5);
    assert_eq!(other["config"]["sigma"], 0.7);
    assert_ne!(other["result"]["lhs"], json(&first)["result"]["lhs"]);
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["crofton-verify", "--space", "euclid", "--n", "2"][..],
        &["crofton-verify", "--space", "hR", "--n", "1", "--k", "2", "--seed", "1"],
        &["haar-test", "--algebra", "hQ", "--kh", "2", "--kv", "0", "--seed", "1"],
        &["modulus-solve", "--p", "0.5"],
        &["corollary-trend", "--p", "1.0", "--seed", "1"],
        &["group-selftest", "--no-such-flag"],
    ] {
        let out = carnot(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let v = json(&out);
        assert_eq!(v["exit_code"], 2);
        assert!(v["error"]["message"].as_str().unwrap().len() > 3);
    }
}

#[test]
fn solver_stall_exits_with_three() {
    let out = carnot(&["modulus-solve", "--family", "lines", "--p", "3", "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "numerical");
    assert_eq!(v["experiment"], "modulus-solve");
}

#[test]
fn haar_test_writes_sample_matrices() {
    let path = scratch("samples.csv");
    let out = carnot(&[
        "haar-test", "--algebra", "hC", "--kh", "2", "--kv", "1", "--count", "50", "--seed", "2", "--with-reflections",
        "--samples-csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["closure"]["passed"], 50);
    assert_eq!(r["compatibility"]["passed"], 50);
    let mut rd = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rd.headers().unwrap().len(), 1 + 2 * 4 + 2);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 50);
    // Each basis vector has unit length.
    let h0: f64 = (1..5).map(|i| rows[7][i].parse::<f64>().unwrap().powi(2)).sum();
    assert!((h0 - 1.0).abs() < 1e-12);
}

#[test]
fn corollary_trend_table() {
    let path = scratch("trend.csv");
    let out = carnot(&[
        "corollary-trend", "--space", "euclid", "--n", "2", "--k", "1", "--p", "2,3", "--planes", "16", "--divisions", "8",
        "--seed", "3", "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[5..8], ["level", "value", "ratio"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| &r[10] == "true"));
    assert_eq!(&rows[0][9], "Exceptional");
    assert_eq!(&rows[4][9], "Bounded");
    // Vertical shapes give one row with the bound only.
    let out = carnot(&[
        "corollary-trend", "--space", "hC", "--n", "1", "--kh", "2", "--kv", "1", "--seed", "3", "--csv", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows: Vec<csv::StringRecord> = csv::Reader::from_path(&path).unwrap().records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[5].is_empty()));
}

#[test]
fn ahlfors_and_witness_reports() {
    let out = carnot(&["ahlfors-check", "--seed", "5", "--c0-samples", "20000"]);
    assert_eq!(out.status.code(), Some(0));
    let p = &json(&out)["result"]["profile"];
    assert!((p["slope"].as_f64().unwrap() - 3.0).abs() < 0.3);
    let fixture = scratch("graph.json");
    std::fs::write(&fixture, r#"{"split": {"M_h": [0], "M_v": []}, "grid": {"lo": -1, "hi": 1, "step": 0.001}, "f": "zero"}"#).unwrap();
    let out = carnot(&["ahlfors-check", "--seed", "5", "--c0-samples", "20000", "--fixture", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!((json(&out)["result"]["profile"]["slope"].as_f64().unwrap() - 1.0).abs() < 0.1);
    let out = carnot(&["exceptional-witness", "--witness", "radial-log", "--alpha", "0.75", "--p", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["lp"]["verdict"], "Converging");
    assert_eq!(r["rings"]["verdict"], "Diverging");
}
