//! End-to-end tests of the claimgate binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_claimgate"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn check_cls_reports_probability_and_bounds() {
    let out = run(&[
        "check-cls", "--n", "500", "--acc-a", "0.81", "--acc-b", "0.80", "--congruence", "median",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("probability of false claims: 0.33"), "{text}");
    assert!(text.contains("congruence bounds"));
    assert!(text.contains("clamped: false"));
    assert!(text.contains("\"seed\":42"));
}

#[test]
fn check_cls_rejects_swapped_ranks_with_exit_2() {
    let out = run(&["check-cls", "--n", "100", "--acc-a", "0.7", "--acc-b", "0.8"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("acc_a >= acc_b"), "{err}");
}

#[test]
fn check_cls_rejects_bad_numerics_with_exit_2() {
    let out = run(&["check-cls", "--n", "100", "--acc-a", "1.7", "--acc-b", "0.8"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_cls_json_is_byte_identical_across_runs() {
    let args = [
        "check-cls", "--n", "500", "--acc-a", "0.81", "--acc-b", "0.80", "--seed", "7", "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_cls_env_seed_is_overridden_by_flag() {
    let from_env = bin()
        .args(["check-cls", "--n", "200", "--acc-a", "0.9", "--acc-b", "0.88", "--json"])
        .env("CLAIMGATE_SEED", "11")
        .output()
        .unwrap();
    let from_flag = bin()
        .args(["check-cls", "--n", "200", "--acc-a", "0.9", "--acc-b", "0.88", "--seed", "11", "--json"])
        .output()
        .unwrap();
    assert_eq!(from_env.stdout, from_flag.stdout);
    let flag_wins = bin()
        .args(["check-cls", "--n", "200", "--acc-a", "0.9", "--acc-b", "0.88", "--seed", "3", "--json"])
        .env("CLAIMGATE_SEED", "11")
        .output()
        .unwrap();
    let direct = bin()
        .args(["check-cls", "--n", "200", "--acc-a", "0.9", "--acc-b", "0.88", "--seed", "3", "--json"])
        .output()
        .unwrap();
    assert_eq!(flag_wins.stdout, direct.stdout);
}

#[test]
fn check_seg_matches_hand_derived_fixture() {
    let out = run(&[
        "check-seg", "--n", "25", "--dsc-a", "0.85", "--dsc-b", "0.83", "--sd-a", "0.1",
        "--sd-b", "0.1", "--congruence", "0.67",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("probability of false claims: 0.115"), "{}", stdout(&out));
}

#[test]
fn check_seg_equal_means_is_exactly_half() {
    let out = run(&["check-seg", "--n", "40", "--dsc-a", "0.8", "--dsc-b", "0.8"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("probability of false claims: 0.5\n"));
}

#[test]
fn check_seg_percent_scale_matches_unit_scale() {
    let unit = run(&[
        "check-seg", "--n", "30", "--dsc-a", "0.85", "--dsc-b", "0.83", "--impute", "point",
        "--json",
    ]);
    let pct = run(&[
        "check-seg", "--n", "30", "--dsc-a", "85", "--dsc-b", "83", "--impute", "point",
        "--scale", "percent", "--json",
    ]);
    let get_prob = |o: &Output| {
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["probability"].as_f64().unwrap()
    };
    assert_eq!(get_prob(&unit), get_prob(&pct));
}

#[test]
fn check_seg_impute_variants_are_ordered() {
    let prob = |variant: &str| {
        let out = run(&[
            "check-seg", "--n", "62", "--dsc-a", "0.81", "--dsc-b", "0.80", "--impute", variant,
            "--json",
        ]);
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["probability"].as_f64().unwrap()
    };
    let (q1, point, q3) = (prob("q1"), prob("point"), prob("q3"));
    assert!(q1 <= point && point <= q3, "{q1} {point} {q3}");
}

#[test]
fn check_seg_rejects_lone_sd_flag() {
    let out = run(&["check-seg", "--n", "30", "--dsc-a", "0.85", "--dsc-b", "0.83", "--sd-a", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corpus_writes_the_report_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "corpus",
        fixture("corpus.csv").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--k",
        "20000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "report.json",
        "estimates.csv",
        "curve_median.csv",
        "curve_median_papers.csv",
        "rejections.csv",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["summary"]["n_total"], 13);
    assert_eq!(report["summary"]["n_eligible"], 9);
    assert_eq!(report["rejections"].as_array().unwrap().len(), 2);
    assert_eq!(report["excluded"].as_array().unwrap().len(), 4);
    // Two comparison rows for the same paper collapse to one entry in the
    // paper-level curve: 9 rows over 8 distinct papers.
    let row_curve = &report["curves"][0]["cumulative_pct"];
    let paper_curve = &report["paper_level_curves"][0]["cumulative_pct"];
    assert_eq!(report["records"].as_array().unwrap().len(), 9);
    assert!(row_curve != paper_curve || row_curve[0] == paper_curve[0]);

    let rejections = std::fs::read_to_string(dir.path().join("rejections.csv")).unwrap();
    assert!(rejections.contains("no-independent-test"));
    assert!(rejections.contains("rank-order-violation"));
    assert!(rejections.contains("missing-test-size"));
    assert!(rejections.contains("missing-metric-values"));

    let estimates = std::fs::read_to_string(dir.path().join("estimates.csv")).unwrap();
    let clamped_row = estimates
        .lines()
        .find(|l| l.contains("cls-clamped"))
        .expect("clamped row present");
    assert!(clamped_row.contains("0.95,true"), "clamped at the feasible bound: {clamped_row}");
    // Percent-scale metrics were normalized at ingestion.
    let pct_row = estimates.lines().find(|l| l.contains("seg-percent")).unwrap();
    assert!(pct_row.contains("0.015"), "delta on unit scale: {pct_row}");
}

#[test]
fn corpus_all_presets_keeps_segmentation_curves_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "corpus",
        fixture("corpus.csv").to_str().unwrap(),
        "--task",
        "segmentation",
        "--presets",
        "all",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--k",
        "20000",
    ]);
    assert!(out.status.success());
    let read_curve = |preset: &str| -> Vec<f64> {
        let text =
            std::fs::read_to_string(dir.path().join(format!("curve_{preset}.csv"))).unwrap();
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("threshold"))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    let q1 = read_curve("q1");
    let median = read_curve("median");
    let q3 = read_curve("q3");
    for i in 0..q1.len() {
        assert!(q3[i] <= median[i] + 1e-12, "q3 above median at {i}");
        assert!(median[i] <= q1[i] + 1e-12, "median above q1 at {i}");
    }
}

#[test]
fn corpus_unreadable_file_is_fatal() {
    let out = run(&["corpus", "/nonexistent/corpus.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn grid_zero_delta_column_is_half() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("grid.csv");
    let out = run(&[
        "grid", "--task", "segmentation", "--n-list", "25,62", "--delta-list", "0,0.01",
        "--base", "0.8", "--out", csv_path.to_str().unwrap(), "--k", "5000",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    for line in text.lines().filter(|l| l.split(',').nth(1) == Some("0")) {
        assert!(line.contains(",0.5,"), "zero-delta row not at half: {line}");
    }
}

#[test]
fn grid_infeasible_cells_flagged_and_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("grid.csv");
    let svg_path = dir.path().join("grid.svg");
    let out = run(&[
        "grid", "--task", "classification", "--n-list", "100", "--delta-list", "0.1,0.5",
        "--base", "0.8", "--out", csv_path.to_str().unwrap(), "--svg", svg_path.to_str().unwrap(),
        "--k", "5000",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.lines().any(|l| l.ends_with(",infeasible")));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("n/a"));
    assert!(svg.contains("<desc>"));
}

#[test]
fn grid_band_improves_with_eight_times_the_test_set() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("grid.csv");
    let out = run(&[
        "grid", "--task", "classification", "--n-list", "500,4000", "--delta-list", "0.01",
        "--base", "0.7", "--out", csv_path.to_str().unwrap(), "--k", "60000",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let band_of = |n: &str| {
        text.lines()
            .find(|l| l.starts_with(&format!("{n},0.01,median")))
            .unwrap()
            .split(',')
            .nth(4)
            .unwrap()
            .to_string()
    };
    assert_eq!(band_of("500"), "red");
    assert_eq!(band_of("4000"), "green");
}

#[test]
fn required_n_segmentation_bracket() {
    let out = run(&[
        "required-n", "--task", "segmentation", "--delta", "0.01", "--base", "0.8",
        "--congruence", "median", "--target", "0.05", "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["status"], "found");
    assert_eq!(v["result"]["n"], 451);
}

#[test]
fn required_n_reports_exceeds_cap() {
    let out = run(&[
        "required-n", "--task", "segmentation", "--delta", "0.0001", "--base", "0.8",
        "--target", "0.05", "--cap", "10000", "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["status"], "exceeds-cap");
    assert_eq!(v["result"]["cap"], 10000);
}

#[test]
fn check_cls_round_counts_flag_is_recorded_and_applied() {
    // Fractional implied counts; rounding makes them equal and the
    // probability settles at one half.
    let out = run(&[
        "check-cls", "--n", "50", "--acc-a", "0.913", "--acc-b", "0.9", "--congruence", "0.83",
        "--round-counts", "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["round_counts"], true);
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 0.5).abs() < 0.01, "rounded counts should sit at 0.5, got {p}");
}

#[test]
fn congruence_zero_variance_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    std::fs::write(&path, "id,a,b\ni1,0.5,0.1\ni2,0.5,0.2\ni3,0.5,0.3\n").unwrap();
    let out = run(&["congruence", path.to_str().unwrap(), "--task", "segmentation"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("zero variance"), "{err}");
}

#[test]
fn congruence_classification_fixture() {
    let out = run(&[
        "congruence",
        fixture("paired_cls.csv").to_str().unwrap(),
        "--task",
        "classification",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"], 0.25);
    assert_eq!(v["provenance"], "empirical");
    assert_eq!(v["n_images"], 4);
}

#[test]
fn congruence_segmentation_fixture() {
    let out = run(&[
        "congruence",
        fixture("paired_seg.csv").to_str().unwrap(),
        "--task",
        "segmentation",
        "--json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = v["value"].as_f64().unwrap();
    assert!(r > 0.8 && r <= 1.0, "expected strong positive correlation, got {r}");
}
