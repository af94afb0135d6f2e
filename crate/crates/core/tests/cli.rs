use std::path::Path;
use std::process::{Command, Output};

use elliott::market_data::CandleSeries;
use elliott::synthetic::{full_cycle_scenario, planted_impulses, series_from_pivot_prices};

fn elliott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elliott"))
        .args(args)
        .output()
        .unwrap()
}

fn save(dir: &Path, name: &str, series: &CandleSeries) -> String {
    let path = dir.join(name);
    series.save_csv(&path).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn scan_finds_the_reference_impulse() {
    let dir = tempfile::tempdir().unwrap();
    let series = series_from_pivot_prices(&[100.0, 110.0, 104.0, 120.0, 112.0, 126.0, 115.0], 4);
    let input = save(dir.path(), "amzn.csv", &series);
    let out = elliott(&[
        "scan",
        "--input",
        &input,
        "--interval",
        "daily",
        "--kinds",
        "impulse5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let matches = json.as_array().unwrap();
    assert_eq!(matches.len(), 1);
    assert_eq!(matches[0]["kind"], "impulse_complete");
    let prices: Vec<f64> = matches[0]["waves"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w["end_price"].as_f64().unwrap())
        .collect();
    assert_eq!(prices, [110.0, 104.0, 120.0, 112.0, 126.0]);
}

#[test]
fn scan_writes_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "p.csv", &planted_impulses(2, 100.0));
    let out_dir = dir.path().join("out");
    let out = elliott(&[
        "scan",
        "--input",
        &input,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(out_dir.join("matches.json")).unwrap();
    assert!(!serde_json::from_str::<Vec<serde_json::Value>>(&text)
        .unwrap()
        .is_empty());
}

#[test]
fn empty_scan_prints_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(
        dir.path(),
        "up.csv",
        &series_from_pivot_prices(&[100.0, 180.0], 40),
    );
    let out = elliott(&["scan", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "[]");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(
        dir.path(),
        "up.csv",
        &series_from_pivot_prices(&[100.0, 180.0], 40),
    );
    let missing = dir.path().join("missing.csv");
    let cases: Vec<Vec<&str>> = vec![
        vec!["scan", "--input", &input, "--kinds", "triangle"],
        vec!["scan", "--input", &input, "--interval", "weekly"],
        vec!["scan", "--input", &input, "--pivot-threshold", "0"],
        vec!["scan", "--input", &input, "--from", "last tuesday"],
        vec!["scan", "--input", missing.to_str().unwrap()],
        vec!["replay", "--input", missing.to_str().unwrap()],
        vec!["analyze", "--input", &input, "--narrator", "gpt"],
        vec!["scan"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = elliott(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
    assert_eq!(elliott(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_csv_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "timestamp,open,high,low,close,volume\n1,2,3\n").unwrap();
    let out = elliott(&["scan", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn analyze_failure_names_the_stage() {
    let out = elliott(&["analyze", "--input", "/nonexistent/x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("DataEngineer"), "{}", stderr(&out));
}

#[test]
fn analyze_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "cycle.csv", &full_cycle_scenario().prefix(44));
    let out_dir = dir.path().join("report");
    let out = elliott(&[
        "analyze",
        "--input",
        &input,
        "--symbol",
        "CYC",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let md = std::fs::read_to_string(out_dir.join("report.md")).unwrap();
    assert!(md.starts_with("# CYC daily Elliott wave report"));
    assert!(md.contains("BUY at 42.00"), "{md}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["signal"]["target"], 50.0);
    assert_eq!(json["chart"], "chart.svg");
    assert!(std::fs::read_to_string(out_dir.join("chart.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn analyze_without_out_prints_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "cycle.csv", &full_cycle_scenario());
    let out = elliott(&["analyze", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("## Recommendation"));
}

#[test]
fn window_flags_limit_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let series = full_cycle_scenario();
    let input = save(dir.path(), "cycle.csv", &series);
    let to = series.candles()[43].timestamp.to_string();
    let out_dir = dir.path().join("w");
    let out = elliott(&[
        "analyze",
        "--input",
        &input,
        "--to",
        &to,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(json["window"]["candles"], 44);
}

#[test]
fn crossval_prints_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(
        dir.path(),
        "planted.csv",
        &planted_impulses(20, 100.0).prefix(1000),
    );
    let out = elliott(&["crossval", "--input", &input, "--with-backtesting"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kind, N, acc_without, acc_with"));
    assert_eq!(lines.next(), Some("impulse 1-2-3-4, 20, 100.00%, 100.00%"));
    assert_eq!(
        lines.next(),
        Some("impulse 1-2-3-4-5, 19, 100.00%, 100.00%")
    );
}

#[test]
fn crossval_on_tiny_input_warns_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(
        dir.path(),
        "tiny.csv",
        &series_from_pivot_prices(&[100.0, 110.0], 9),
    );
    let out = elliott(&["crossval", "--input", &input, "--folds", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("warning") && err.contains("too short"),
        "{err}"
    );
}

#[test]
fn backtest_train_writes_a_loadable_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "planted.csv", &planted_impulses(10, 100.0));
    let table = dir.path().join("t/table.json");
    let out = elliott(&[
        "backtest-train",
        "--input",
        &input,
        "--kinds",
        "impulse4,impulse5",
        "--table",
        table.to_str().unwrap(),
        "--alpha",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let loaded = elliott::backtester::BacktestTable::load(&table).unwrap();
    assert!(!loaded.is_empty());
    // every planted impulse resolves the textbook way
    assert!(loaded.entries().all(|(_, e)| e.hits == e.trials));
    let bad = elliott(&["backtest-train", "--input", &input, "--alpha", "0"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn replay_logs_the_cycle_trade() {
    let dir = tempfile::tempdir().unwrap();
    let input = save(dir.path(), "cycle.csv", &full_cycle_scenario());
    let out = elliott(&["replay", "--input", &input]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let log: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entry = log["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["signal"]["pattern_kind"] == "full_cycle")
        .expect("full cycle entry");
    assert_eq!(entry["signal"]["direction"], "buy");
    assert_eq!(entry["signal"]["entry"], 42.0);
    assert_eq!(entry["trade"]["theoretical_profit"], 8.0);
    assert_eq!(entry["trade"]["status"], "target_hit");
}
