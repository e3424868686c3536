use std::path::PathBuf;
use std::process::{Command, Output};

use ineqlab::inequalities::{linear_xp_report, LinearMode};
use ineqlab::{make_sample_plan, InequalityReport};
use ineqlab_cli::run::EXPERIMENTS;
use serde_json::Value;

fn ineqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ineqlab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ineqlab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_file(&path);
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn run_report_matches_library() {
    let config = scratch("linear.json");
    std::fs::write(&config, r#"{"k":2,"p":3,"a":[[1,0.5],[0.2,-1],[0.3,0.3]],"seed":4}"#).unwrap();
    let out = ineqlab(&["--deterministic", "run", "linear-xp", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["schema"], "xp-report/1");
    assert!(doc.get("wall_clock_seconds").is_none());
    let report: InequalityReport = serde_json::from_value(doc["result"].clone()).unwrap();
    let plan = make_sample_plan(1, 3, 2, 1_000_000, 4).unwrap();
    let direct = linear_xp_report(&[vec![1.0, 0.5], vec![0.2, -1.0], vec![0.3, 0.3]], 2, 3.0, LinearMode::Rademacher, &plan).unwrap();
    assert_eq!(report, direct);
}

#[test]
fn timings_are_reported_unless_deterministic() {
    let out = ineqlab(&["run", "circular-moment", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["wall_clock_seconds"].is_number());
}

#[test]
fn warnings_exit_with_two() {
    let out = ineqlab(&["--deterministic", "run", "metric-xp", "--n", "2", "--m", "1", "--k", "1", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!stdout_json(&out)["result"]["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn errors_are_json_on_stderr() {
    for (args, kind) in [
        (vec!["run", "no-such-experiment"], "config"),
        (vec!["run", "metric-xp", "--m", "1", "--n", "2", "--k", "1", "--p", "0.5"], "parameter"),
        (vec!["run", "trace"], "config"),
        (vec!["verify", "no-such-suite"], "config"),
    ] {
        let out = ineqlab(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(out.stdout.is_empty());
        let err: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
        assert_eq!(err["schema"], "xp-report/1");
        assert_eq!(err["error"]["kind"], kind, "{args:?}");
        assert!(err["error"]["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
}

#[test]
fn scan_writes_one_row_per_value() {
    let out = ineqlab(&["scan", "rosenthal-distortion", "--q", "3", "--p", "6", "--sweep", "n=geo:4..64:5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let header = reader.headers().unwrap().clone();
    let n_col = header.iter().position(|h| h == "n").unwrap();
    let d_col = header.iter().position(|h| h == "distortion").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let ns: Vec<f64> = rows.iter().map(|r| r[n_col].parse().unwrap()).collect();
    assert_eq!(ns, [4.0, 8.0, 16.0, 32.0, 64.0]);
    let ds: Vec<f64> = rows.iter().map(|r| r[d_col].parse().unwrap()).collect();
    assert!(ds.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn scan_rejects_two_sweeps() {
    let out = ineqlab(&["scan", "rosenthal-distortion", "--q", "3", "--p", "6", "--sweep", "n=4,8", "--sweep", "p=5,6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_and_csv_append() {
    let out_path = scratch("report.json");
    let csv_path = scratch("rows.csv");
    for p in ["3", "4"] {
        let out = ineqlab(&[
            "--deterministic",
            "run",
            "circular-moment",
            "--p",
            p,
            "--out",
            out_path.to_str().unwrap(),
            "--csv-append",
            csv_path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["config"]["p"], 4.0);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains('p') && !lines[1].is_empty());
}

#[test]
fn csv_format_prints_header_and_row() {
    let out = ineqlab(&["--deterministic", "run", "psd-counterexample", "--s", "0.1", "--q", "4", "--K", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
}

#[test]
fn list_names_every_experiment() {
    let out = ineqlab(&["list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), EXPERIMENTS);
}

#[test]
fn verify_suite_passes() {
    let out = ineqlab(&["verify", "cli", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let checks: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(checks.as_array().unwrap().iter().all(|c| c["passed"] == true));
}
