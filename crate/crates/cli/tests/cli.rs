//! End-to-end runs of the `dealerfield` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dealerfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dealerfield"))
        .args(args)
        .env("DEALERFIELD_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn quote_schedule_for_single_dealer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dealerfield(&["quotes", "--preset", "table1", "--q", "0", "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("quotes.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,delta_b,delta_a");
    assert_eq!(lines.len(), 201);
    assert_eq!(lines[1], "0,0.845385,0.845385");
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn negative_inventory_skews_quotes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dealerfield(&["quotes", "--preset", "table2", "--q", "-3", "--out", &out_arg(dir.path())]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("quotes.csv")).unwrap();
    // short three units: bid above the ask offset, mirroring q = 3
    assert_eq!(text.lines().nth(1).unwrap(), "0,-0.0468982,2.3531");
}

#[test]
fn tables_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |dir: &Path| {
        vec![
            "tables".to_string(),
            "--preset".into(),
            "table1,table5".into(),
            "--runs".into(),
            "60".into(),
            "--seed".into(),
            "42".into(),
            "--out".into(),
            out_arg(dir),
        ]
    };
    let first = dealerfield(&args(a.path()).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(first.status.success());
    let second = Command::new(env!("CARGO_BIN_EXE_dealerfield"))
        .args(args(b.path()))
        .env("DEALERFIELD_THREADS", "1")
        .output()
        .unwrap();
    assert!(second.status.success());
    for name in ["table1", "table5"] {
        let x = fs::read(a.path().join(name).join("stats.csv")).unwrap();
        let y = fs::read(b.path().join(name).join("stats.csv")).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let table1 = fs::read_to_string(a.path().join("table1/stats.csv")).unwrap();
    let mut lines = table1.lines();
    assert_eq!(lines.next().unwrap(), "agent,average_spread,profit_mean,profit_std,qT_mean,qT_std");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "1.49077");
    assert!(lines.next().is_none());
}

#[test]
fn simulate_from_config_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{
            "market": { "s0": 100, "sigma": 2, "T": 1, "dt": 0.005, "A": 140, "k": 1.5 },
            "dealers": [ { "gamma": 0.1 }, { "gamma": 1.0, "q0": 4 } ],
            "runs": 25,
            "seed": 9,
            "flags": { "trace": true }
        }"#,
    )
    .unwrap();
    let out = dealerfield(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stats = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 3);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header = trace.lines().next().unwrap();
    assert!(header.starts_with("t,s,delta_b_1,delta_a_1,bid_price_1,ask_price_1,q_1,x_1,fill_a_1,fill_b_1,delta_b_2"));
    assert_eq!(trace.lines().count(), 201);
    let first: Vec<&str> = trace.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "100");
}

#[test]
fn trace_subcommand_matches_simulate_trace() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let t = dealerfield(&["trace", "--preset", "table3", "--seed", "3", "--out", &out_arg(a.path())]);
    let s = dealerfield(&[
        "simulate", "--preset", "table3", "--runs", "2", "--seed", "3", "--trace", "--out", &out_arg(b.path()),
    ]);
    assert!(t.status.success() && s.status.success());
    assert_eq!(
        fs::read(a.path().join("trace.csv")).unwrap(),
        fs::read(b.path().join("trace.csv")).unwrap()
    );
}

#[test]
fn errors_exit_nonzero_with_diagnostic() {
    let unknown = dealerfield(&["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown subcommand `frobnicate`"));

    let preset = dealerfield(&["tables", "--preset", "table42", "--runs", "2"]);
    assert_eq!(preset.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&preset.stderr).contains("unknown preset `table42`"));

    let missing = dealerfield(&["simulate", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/cfg.json"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("zero.json");
    fs::write(
        &cfg,
        r#"{ "market": { "s0": 100, "sigma": 2, "T": 1, "dt": 0.005, "A": 140, "k": 1.5 },
             "dealers": [ { "gamma": 0.1 } ], "runs": 0 }"#,
    )
    .unwrap();
    let zero = dealerfield(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert_eq!(zero.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&zero.stderr).contains("invalid config"));
}

#[test]
fn check_suite_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dealerfield(&["check", "--runs", "200", "--out", &out_arg(dir.path())]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    let report = fs::read_to_string(dir.path().join("check_report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "name,expected,actual,tolerance,pass");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 40);
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{report}");
}
