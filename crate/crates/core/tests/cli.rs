use std::path::Path;

use mixpolar_core::cli::{run, EXIT_CAPACITY, EXIT_OK, EXIT_USAGE};

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let path = dir.join(name);
    let mut argv = vec!["mixpolar"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let code = run(argv);
    (code, std::fs::read_to_string(&path).unwrap_or_default())
}

#[test]
fn kernels_table_lists_distances_and_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "k.csv", &["kernels"]);
    assert_eq!(code, EXIT_OK);
    assert!(text.starts_with('#'));
    let g1: Vec<String> = text
        .lines()
        .filter(|l| l.starts_with("g1,"))
        .map(|l| l.split(',').nth(5).unwrap().to_string())
        .collect();
    assert_eq!(g1, vec!["1", "2", "4"]);
    let rs4 = text.lines().find(|l| l.starts_with("rs4,")).unwrap();
    assert!(rs4.contains("0.57312"));
}

#[test]
fn every_csv_output_starts_with_a_convention_comment() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["kernels"],
        vec!["layout", "--n", "2", "--format", "csv"],
        vec!["de", "--n", "2"],
        vec!["curve", "--n", "2"],
        vec!["select", "--n", "2", "--K", "8", "--format", "csv"],
        vec!["simulate", "--n", "2", "--K", "8", "--trials", "50"],
        vec!["process", "--n", "3", "--trials", "50", "--steps", "100"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (code, text) = run_to(dir.path(), &format!("{i}.csv"), args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        assert!(text.starts_with("# "), "{args:?}");
    }
}

#[test]
fn json_outputs_parse_and_carry_conventions() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["layout", "--n", "3", "--scheme", "arikan"],
        vec!["de", "--n", "1", "--format", "json"],
        vec!["curve", "--n", "2", "--format", "json"],
        vec!["select", "--n", "2", "--rate", "0.5"],
        vec!["process", "--n", "2", "--trials", "20", "--steps", "100", "--format", "json"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (code, text) = run_to(dir.path(), &format!("{i}.json"), args);
        assert_eq!(code, EXIT_OK, "{args:?}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["conventions"].is_string(), "{args:?}");
    }
}

#[test]
fn curve_for_all_schemes_has_three_curves() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "c.csv", &["curve", "--scheme", "all", "--n", "3", "--epsilon", "0.5"]);
    assert_eq!(code, EXIT_OK);
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 3 * 14);
    for s in ["mixed", "arikan", "rs4_top"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{s},"))).count(), 14);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["curve", "--n", "4"],
        vec!["simulate", "--n", "3", "--rate", "0.4", "--trials", "300", "--seed", "5"],
        vec!["process", "--report", "slln", "--trials", "300", "--steps", "100", "--seed", "2"],
        vec!["de", "--n", "3", "--scheme", "rs4_top"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut one = args.clone();
        one.extend_from_slice(&["--threads", "1"]);
        let mut four = args.clone();
        four.extend_from_slice(&["--threads", "4"]);
        let (_, a) = run_to(dir.path(), &format!("{i}a"), args);
        let (_, b) = run_to(dir.path(), &format!("{i}b"), args);
        let (_, c) = run_to(dir.path(), &format!("{i}c"), &one);
        let (_, d) = run_to(dir.path(), &format!("{i}d"), &four);
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
        assert_eq!(a, c, "{args:?}");
        assert_eq!(a, d, "{args:?}");
    }
}

#[test]
fn unreachable_k_reports_nearest() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "s.json", &["select", "--scheme", "rs4_top", "--n", "2", "--K", "7"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["requested_K"], 7);
    assert_eq!(v["K"], 6);
    assert_eq!(v["exact"], false);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let usage: Vec<Vec<&str>> = vec![
        vec!["layout"],
        vec!["layout", "--n", "2", "--scheme", "binary"],
        vec!["de", "--n", "2", "--epsilon", "1.5"],
        vec!["de", "--n", "0"],
        vec!["select", "--n", "2"],
        vec!["select", "--n", "2", "--K", "17"],
        vec!["de", "--n", "2", "--scheme", "all"],
        vec!["frobnicate"],
        vec!["process", "--n", "9"],
    ];
    for args in &usage {
        assert_eq!(run_to(dir.path(), "u", args).0, EXIT_USAGE, "{args:?}");
    }
    assert_eq!(run_to(dir.path(), "cap", &["layout", "--n", "11"]).0, EXIT_CAPACITY);
}
