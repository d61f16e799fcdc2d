use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turan-gaps"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("TURAN_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn files_with_suffix(dir: &Path, suffix: &str) -> Vec<std::path::PathBuf> {
    let mut found: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    found.sort();
    found
}

fn example_pattern(dir: &Path) -> String {
    let path = dir.join("example.json");
    fs::write(&path, r#"{"r": 3, "m": 3, "multisets": [[1,1,2],[1,2,3]]}"#).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn minimal_m_prints_thirteen() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["minimal-m", "--r", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "13\n");
    assert_eq!(files_with_suffix(dir.path(), ".manifest.json").len(), 1);
}

#[test]
fn ladder_csv_rows() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["ladder", "--r", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "index,composition,value_num,value_den,step_num,step_den",
            "1,1-1-1,2,9,2,9",
            "2,2-1-0,8,9,2,3",
            "3,3-0-0,1,1,1,9",
        ]
    );
    let written = files_with_suffix(dir.path(), ".csv");
    assert_eq!(fs::read_to_string(&written[0]).unwrap(), text);
}

#[test]
fn lagrangian_certificate_of_example() {
    let dir = TempDir::new().unwrap();
    let pattern = example_pattern(dir.path());
    let out = run(dir.path(), &["lagrangian", "--pattern", &pattern, "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let value = json["certificate"]["value"].as_f64().unwrap();
    assert!(value >= 1.0 / 3.0 - 1e-8);
    assert!((value - 4.0 / 9.0).abs() < 1e-8, "{value}");
    assert!(json["upper"]["bound"].as_f64().unwrap() >= value);
    assert_eq!(json["polynomial"], "3*x1^2*x2 + 6*x1*x2*x3");
}

#[test]
fn blow_up_edge_list() {
    let dir = TempDir::new().unwrap();
    let pattern = example_pattern(dir.path());
    let out = run(dir.path(), &["blow-up", "--pattern", &pattern, "--sizes", "2,2,2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    assert_eq!(text.lines().next(), Some("1 2 3"));
}

#[test]
fn chain_is_deterministic_and_replayable() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["chain", "--r", "3", "--m", "5", "--order", "random", "--seed", "11"];
    let first = run(a.path(), &args);
    let second = run(b.path(), &args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let names =
        |d: &Path| -> Vec<_> { files_with_suffix(d, "").iter().map(|p| p.file_name().unwrap().to_owned()).collect() };
    assert_eq!(names(a.path()), names(b.path()));

    let manifest = files_with_suffix(a.path(), ".manifest.json").remove(0);
    let replay_dir = TempDir::new().unwrap();
    let replayed = run(replay_dir.path(), &["replay", "--manifest", manifest.to_str().unwrap()]);
    assert!(replayed.status.success(), "{}", String::from_utf8_lossy(&replayed.stderr));
    assert_eq!(replayed.stdout, first.stdout);
    assert!(String::from_utf8_lossy(&replayed.stderr).contains("reproduced"));
}

#[test]
fn replay_detects_tampered_output() {
    let dir = TempDir::new().unwrap();
    assert!(run(dir.path(), &["max-step", "--r", "4"]).status.success());
    let output = files_with_suffix(dir.path(), ".txt").remove(0);
    fs::write(&output, "tampered\n").unwrap();
    let manifest = files_with_suffix(dir.path(), ".manifest.json").remove(0);
    let elsewhere = TempDir::new().unwrap();
    let replayed = run(elsewhere.path(), &["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(replayed.status.code(), Some(1));
}

#[test]
fn checks_pass_with_exit_zero() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["lemma-check", "--r", "3", "--s", "3"],
        vec!["bunching", "--r", "5", "--h", "3/2"],
        vec!["max-step", "--r", "5", "--format", "json"],
        vec!["ladder", "--r", "4", "--mc-trials", "200000", "--seed", "3"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn downset_file_input() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("a.json");
    fs::write(&path, r#"{"r": 3, "s": 3, "members": [[1,1,1],[2,1,0]]}"#).unwrap();
    let out = run(dir.path(), &["lemma-check", "--downset", path.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("{1-1-1 2-1-0},8,9,"));

    fs::write(&path, r#"{"r": 3, "s": 3, "members": [[2,1,0]]}"#).unwrap();
    let out = run(dir.path(), &["lemma-check", "--downset", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["ladder"],
        vec!["ladder", "--r", "3", "--format", "xml"],
        vec!["minimal-m", "--r", "2"],
        vec!["bunching", "--r", "4", "--h", "1/2"],
        vec!["lagrangian", "--pattern", "/nonexistent.json"],
    ] {
        let out = run(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn bad_worker_count_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_turan-gaps"))
        .args(["minimal-m", "--r", "3", "--out"])
        .arg(dir.path())
        .env("TURAN_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
