use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use robustbf_harness::experiment::{DesignReport, Scheme};
use serde_json::Value;
use tempfile::TempDir;

fn robustbf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robustbf"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn small_db(dir: &TempDir, points: &str) -> PathBuf {
    let out = robustbf(
        dir.path(),
        &[
            "generate",
            "--seed",
            "3",
            "--points",
            points,
            "--db",
            "db.jsonl",
            "--meta",
            "db.meta.json",
        ],
    );
    ok(&out);
    dir.path().join("db.jsonl")
}

#[test]
fn generate_default_scale_and_is_idempotent() {
    let dir = TempDir::new().unwrap();
    ok(&robustbf(
        dir.path(),
        &["generate", "--db", "a.jsonl", "--meta", "a.json"],
    ));
    ok(&robustbf(
        dir.path(),
        &["generate", "--db", "b.jsonl", "--meta", "b.json"],
    ));
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.jsonl")).unwrap());
    assert_eq!(a.iter().filter(|&&c| c == b'\n').count(), 1000);
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
    let meta: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(meta["database"]["antennas"], 32);
}

#[test]
fn generate_rejects_empty_trajectory() {
    let dir = TempDir::new().unwrap();
    let out = robustbf(dir.path(), &["generate", "--points", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("N >= 1"));
}

#[test]
fn metadata_reproduces_the_database() {
    let dir = TempDir::new().unwrap();
    small_db(&dir, "40");
    ok(&robustbf(
        dir.path(),
        &[
            "generate",
            "--config",
            "db.meta.json",
            "--db",
            "again.jsonl",
            "--meta",
            "again.json",
        ],
    ));
    assert_eq!(
        std::fs::read(dir.path().join("db.jsonl")).unwrap(),
        std::fs::read(dir.path().join("again.jsonl")).unwrap()
    );
}

#[test]
fn config_file_overrides_flags() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"trajectory": {"points": 7}}"#,
    )
    .unwrap();
    ok(&robustbf(
        dir.path(),
        &[
            "generate", "--points", "50", "--config", "cfg.json", "--db", "x.jsonl", "--meta",
            "x.json",
        ],
    ));
    let text = std::fs::read_to_string(dir.path().join("x.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 7);
}

fn design_report(dir: &TempDir, extra: &[&str]) -> DesignReport {
    let mut args = vec!["design", "--db", "db.jsonl", "--out", "cb.json"];
    args.extend_from_slice(extra);
    ok(&robustbf(dir.path(), &args));
    serde_json::from_slice(&std::fs::read(dir.path().join("cb.json")).unwrap()).unwrap()
}

#[test]
fn design_beats_both_baselines() {
    let dir = TempDir::new().unwrap();
    small_db(&dir, "300");
    let report = design_report(&dir, &["--top-t", "5", "--k", "5", "--codebook-size", "1"]);
    let (mms, ebf, mrt) = (
        report.gain(Scheme::Mms).unwrap(),
        report.gain(Scheme::Ebf).unwrap(),
        report.gain(Scheme::Mrt).unwrap(),
    );
    assert!(mms >= ebf - 1e-8 && mms >= mrt - 1e-8, "{mms} {ebf} {mrt}");
    assert!(report.dominance_ok);
    assert!(report.neighborhood.member_indices.contains(&299));
    let cb = report.codebook.to_codebook::<f64>().unwrap();
    assert_eq!((cb.dim(), cb.len()), (32, 1));
    assert!(report.codebook.report.as_ref().unwrap().iterations >= 1);
}

#[test]
fn design_on_a_single_record_reaches_full_power() {
    let dir = TempDir::new().unwrap();
    small_db(&dir, "1");
    let report = design_report(&dir, &["--query-index", "0"]);
    for scheme in Scheme::ALL {
        let row = report
            .comparison
            .iter()
            .find(|r| r.scheme == scheme)
            .unwrap();
        assert!(
            (row.min_sum_gain.unwrap() - 1.0).abs() < 1e-6,
            "{scheme}: {row:?}"
        );
        assert!(row.gain_db.unwrap().abs() < 1e-5);
    }
}

#[test]
fn design_accepts_an_external_query_vector() {
    let dir = TempDir::new().unwrap();
    let db = small_db(&dir, "60");
    let line = std::fs::read_to_string(&db)
        .unwrap()
        .lines()
        .nth(20)
        .unwrap()
        .to_string();
    let record: Value = serde_json::from_str(&line).unwrap();
    let vector = serde_json::json!({"re": record["re"], "im": record["im"]});
    std::fs::write(dir.path().join("q.json"), vector.to_string()).unwrap();
    let report = design_report(
        &dir,
        &["--query-vector", "q.json", "--top-t", "1", "--k", "2"],
    );
    assert_eq!(report.neighborhood.initial_indices, vec![20]);
    assert_eq!(report.neighborhood.member_indices, vec![18, 19, 20, 21, 22]);
}

#[test]
fn error_exit_codes_are_distinct() {
    let dir = TempDir::new().unwrap();
    small_db(&dir, "30");
    let invalid = robustbf(
        dir.path(),
        &["design", "--db", "db.jsonl", "--query-index", "30"],
    );
    assert_eq!(invalid.status.code(), Some(1));
    let missing = robustbf(dir.path(), &["design", "--db", "nope.jsonl"]);
    assert_eq!(missing.status.code(), Some(3));
    // a strict threshold of 1 can never be exceeded
    let empty = robustbf(dir.path(), &["design", "--db", "db.jsonl", "--gamma", "1"]);
    assert_eq!(empty.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&empty.stderr).contains("lower the threshold"));
}

#[test]
fn neighborhood_export_lists_members() {
    let dir = TempDir::new().unwrap();
    small_db(&dir, "80");
    ok(&robustbf(
        dir.path(),
        &[
            "neighborhood",
            "--db",
            "db.jsonl",
            "--top-t",
            "2",
            "--k",
            "3",
            "--out",
            "nb.json",
        ],
    ));
    let nb: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("nb.json")).unwrap()).unwrap();
    assert_eq!(nb["query_index"], 79);
    let members = nb["member_indices"].as_array().unwrap();
    assert!(members.len() <= 14 && members.iter().any(|m| m == 79));
}

fn sweep(dir: &TempDir, name: &str, extra: &[&str]) -> String {
    let mut args = vec![
        "sweep", "--seed", "4", "--points", "200", "--trials", "3", "--out", name,
    ];
    args.extend_from_slice(extra);
    ok(&robustbf(dir.path(), &args));
    std::fs::read_to_string(dir.path().join(name)).unwrap()
}

#[test]
fn sweep_rows_are_complete_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = sweep(&dir, "a.csv", &["--axis", "neighbors", "--values", "1,3"]);
    let b = sweep(&dir, "b.csv", &["--axis", "neighbors", "--values", "1,3"]);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(
        lines.next(),
        Some("sweep_value,scheme,gain_db,K,trial,seed")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 3 * 3);
    for value in ["1", "3"] {
        for scheme in ["MMS", "EBF", "MRT"] {
            for trial in ["0", "1", "2"] {
                let n = rows
                    .iter()
                    .filter(|r| r[0] == value && r[1] == scheme && r[4] == trial)
                    .count();
                assert_eq!(n, 1, "{value} {scheme} {trial}");
            }
        }
    }
    // trials share their query across sweep values
    let seed_of = |value: &str, trial: &str| {
        rows.iter()
            .find(|r| r[0] == value && r[4] == trial)
            .unwrap()[5]
            .to_string()
    };
    assert_eq!(seed_of("1", "2"), seed_of("3", "2"));

    let meta: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("a.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["dominance_violations"].as_array().unwrap().len(), 0);
    assert!(meta["averaging"].as_str().unwrap().contains("linear"));
    let summary = std::fs::read_to_string(dir.path().join("a.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 3);

    // the metadata document replays the identical run
    ok(&robustbf(
        dir.path(),
        &["sweep", "--config", "a.meta.json", "--out", "c.csv"],
    ));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("c.csv")).unwrap(),
        a
    );
}

#[test]
fn failed_cells_are_marked_and_the_run_continues() {
    let dir = TempDir::new().unwrap();
    let csv = sweep(&dir, "t.csv", &["--axis", "threshold", "--values", "0.5,1"]);
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows
        .iter()
        .filter(|r| r[0] == "1")
        .all(|r| r[2] == "error" && r[3].is_empty()));
    assert!(rows
        .iter()
        .filter(|r| r[0] == "0.5")
        .all(|r| r[2] != "error"));
    let meta: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("t.meta.json")).unwrap()).unwrap();
    let errors = meta["errors"].as_array().unwrap();
    assert_eq!(errors.len(), 9);
    assert!(errors[0]["message"]
        .as_str()
        .unwrap()
        .starts_with("empty_neighborhood"));
}

#[test]
fn sweep_rejects_unsorted_values() {
    let dir = TempDir::new().unwrap();
    let out = robustbf(
        dir.path(),
        &["sweep", "--axis", "neighbors", "--values", "3,1"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_quick_passes() {
    let dir = TempDir::new().unwrap();
    let out = robustbf(dir.path(), &["verify", "--quick", "--out", "v.json"]);
    ok(&out);
    let report: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 5);
}
