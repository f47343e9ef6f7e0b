//! End-to-end tests of the command-line binary: exit codes, determinism,
//! and report contents.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sum-radii"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn write_temp(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write temp file");
    path.to_string_lossy().into_owned()
}

#[test]
fn gen_is_deterministic_and_solve_reports_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(&["gen", "tight", "--h", "3", "--k", "1"]);
    let second = run(&["gen", "tight", "--h", "3", "--k", "1"]);
    assert!(first.status.success());
    assert_eq!(stdout(&first), stdout(&second));

    let instance = write_temp(dir.path(), "tight.json", stdout(&first).trim());
    let solved = run(&["solve", "--mode", "plain", "--guess", "0", "--no-timestamp", &instance]);
    assert!(solved.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&solved)).unwrap();
    assert_eq!(report["cost"], "3/1");
    assert_eq!(report["dual_objective"], "11/6");

    // Identical invocations are byte-identical without the timestamp.
    let again = run(&["solve", "--mode", "plain", "--guess", "0", "--no-timestamp", &instance]);
    assert_eq!(stdout(&solved), stdout(&again));
}

#[test]
fn parse_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write_temp(dir.path(), "broken.json", "{ not json");
    let output = run(&["solve", &broken]);
    assert_eq!(output.status.code(), Some(2));

    let missing = run(&["solve", "/no/such/file.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_mode = run(&["gen", "nonsense"]);
    assert_eq!(bad_mode.status.code(), Some(2));
}

#[test]
fn infeasible_configurations_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // Two mutually unreachable components, one cluster, no outliers.
    let doc = r#"{
        "k": 1,
        "m": 0,
        "distances": [
            ["0/1", "1/1", "inf", "inf"],
            ["1/1", "0/1", "inf", "inf"],
            ["inf", "inf", "0/1", "1/1"],
            ["inf", "inf", "1/1", "0/1"]
        ]
    }"#;
    let instance = write_temp(dir.path(), "split.json", doc);
    let output = run(&["solve", "--mode", "plain", &instance]);
    assert_eq!(output.status.code(), Some(3));

    // Raising m makes it feasible again.
    let relaxed = run(&["solve", "--mode", "outliers", "--m", "2", "--no-timestamp", &instance]);
    assert!(relaxed.status.success());
}

#[test]
fn bench_emits_one_row_per_instance() {
    let output = run(&[
        "bench",
        "--suite",
        "random",
        "--n",
        "6",
        "--k",
        "2",
        "--m",
        "1",
        "--count",
        "3",
        "--seed",
        "7",
        "--oracle",
        "--no-timestamp",
    ]);
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "header plus three rows: {text}");
    for row in &lines[1..] {
        let columns: Vec<&str> = row.split('\t').collect();
        assert_eq!(columns.len(), 7);
        assert_ne!(columns[3], "-", "oracle column filled: {row}");
        assert_ne!(columns[5], "-", "ratio column filled: {row}");
    }

    // The batch is deterministic.
    let again = run(&[
        "bench", "--suite", "random", "--n", "6", "--k", "2", "--m", "1", "--count", "3",
        "--seed", "7", "--oracle", "--no-timestamp",
    ]);
    assert_eq!(text, stdout(&again));
}

#[test]
fn solve_with_oracle_and_trace_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let generated = run(&["gen", "random", "--n", "7", "--k", "2", "--seed", "5"]);
    assert!(generated.status.success());
    let instance = write_temp(dir.path(), "random.json", stdout(&generated).trim());
    let solved = run(&[
        "solve", "--mode", "plain", "--oracle", "--trace", "--no-timestamp", &instance,
    ]);
    assert!(solved.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&solved)).unwrap();
    assert!(report.get("oracle_cost").is_some());
    assert!(report.get("ratio").is_some());
    assert!(report["diagnostics"].as_array().is_some());
    assert!(report.get("timestamp").is_none());
}
