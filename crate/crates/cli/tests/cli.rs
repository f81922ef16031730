use std::process::{Command, Output};

use serde_json::Value;

fn sudlerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sudlerlab"))
        .args(args)
        .env_remove("SUDLERLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn cf_csv_schema() {
    let o = sudlerlab(&["cf", "--alpha", "golden", "--k", "5"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["k", "a", "p", "q"]);
    let rows: Vec<Vec<String>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    // φ = [1; 1, 1, ...]: p_5/q_5 = 13/8.
    assert_eq!(rows[5], vec!["5", "1", "13", "8"]);
}

#[test]
fn sudler_rows_and_json() {
    let o = sudlerlab(&["sudler", "--alpha", "golden", "--max-n", "100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,logP,err"));
    assert_eq!(lines.count(), 100);

    let o = sudlerlab(&["--format", "json", "sudler", "--alpha", "golden", "--max-n", "3"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report_type"], "sudler");
    assert_eq!(v["columns"], serde_json::json!(["N", "logP", "err"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let p1 = v["rows"][0][1].as_f64().unwrap();
    assert!((p1 - 0.62276).abs() < 1e-5);
}

#[test]
fn summary_reports_are_single_csv_rows() {
    let o = sudlerlab(&["vconst", "--tol", "1e-8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let v_idx = header.iter().position(|&h| h == "V").unwrap();
    let v: f64 = lines[1].split(',').nth(v_idx).unwrap().parse().unwrap();
    assert!((v - 0.16153).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_one() {
    let o = sudlerlab(&["cf", "--alpha", "bogus", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("golden | sqrt:<D>"));
    assert_eq!(stderr(&o).matches("golden | sqrt:<D>").count(), 1);

    let o = sudlerlab(&["cf", "--alpha", "sqrt:4", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("perfect square"));

    let o = sudlerlab(&["sudler", "--alpha", "golden"]);
    assert_eq!(o.status.code(), Some(1));

    let o = sudlerlab(&["sudler", "--alpha", "golden", "--max-n", "5", "--summand", "indicator", "--a", "0.7", "--b", "0.2"]);
    assert_eq!(o.status.code(), Some(1));

    let o = sudlerlab(&["--workers", "0", "vconst"]);
    assert_eq!(o.status.code(), Some(1));

    let o = sudlerlab(&["vconst", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numeric_failures_exit_two() {
    // A finite list is rational: some nα is an integer and the guard trips.
    let o = sudlerlab(&["sudler", "--alpha", "list:2,3", "--max-n", "20"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // Too few random bits for the requested quotients.
    let o = sudlerlab(&["cf", "--alpha", "random:1:64", "--k", "500"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_zero() {
    assert!(sudlerlab(&["--help"]).status.success());
    let o = sudlerlab(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn manifest_sidecar_records_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let out_s = out.to_str().unwrap();
    let o = sudlerlab(&[
        "--format", "json", "--out", out_s, "--workers", "2", "moments", "--alpha", "sqrt:3", "--m", "5000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let payload: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(payload["report_type"], "moments");
    assert_eq!(payload["M"], 5000);
    assert!(payload.get("wall_time_seconds").is_none());
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(format!("{out_s}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "moments");
    assert_eq!(manifest["workers"], 2);
    assert_eq!(manifest["status"], "ok");
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest["precision_bits"].as_u64().unwrap() >= 192);
}

#[test]
fn binary_sidecar_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("s.bin");
    let o = sudlerlab(&[
        "sudler", "--alpha", "e", "--max-n", "50", "--summand", "sawtooth", "--binary", bin.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let raw = std::fs::read(&bin).unwrap();
    assert_eq!(raw.len(), 50 * 16);
    let text = stdout(&o);
    for (i, line) in text.lines().skip(1).enumerate() {
        let rec = &raw[16 * i..16 * (i + 1)];
        let n = u64::from_le_bytes(rec[..8].try_into().unwrap());
        let v = f64::from_le_bytes(rec[8..].try_into().unwrap());
        let mut cols = line.split(',');
        assert_eq!(cols.next().unwrap().parse::<u64>().unwrap(), n);
        assert_eq!(cols.next().unwrap().parse::<f64>().unwrap(), v);
    }
}

#[test]
fn workers_env_var_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_sudlerlab"))
        .args(["vconst", "--tol", "1e-6"])
        .env("SUDLERLAB_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stdout_is_deterministic() {
    let args = ["ae-levy", "--seeds", "200", "--k", "200", "--seed-start", "40"];
    let a = sudlerlab(&args);
    let b = sudlerlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
