//! End-to-end tests of the command-line driver: exit codes, report
//! contents, and the class round-trip guarantee.

use std::path::PathBuf;
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_resint")
}

fn sample_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/sample-job.json")
}

fn run_with(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_sample(seed: &str, out: &std::path::Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run".to_string(),
        sample_config().display().to_string(),
        "--seed".to_string(),
        seed.to_string(),
        "--output".to_string(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(binary())
        .args(&args)
        .output()
        .expect("binary runs")
}

#[test]
fn sample_job_passes_and_reports_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let result = run_sample("7", &out, &[]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.starts_with("report_version 1\n"));
    for line in [
        "coeff 0 = 1",
        "coeff 1 = 24",
        "coeff 2 = 324",
        "coeff 3 = 3200",
        "coeff 4 = 25650",
        "coeff 5 = 176256",
    ] {
        assert!(report.contains(line), "missing `{line}`");
    }
    assert!(report.ends_with("overall pass\n"));
}

#[test]
fn undeclared_class_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{
            "truncation": 4,
            "geometry": {"gram": [[-1]], "canonical": [0], "p_g": 0, "q": 0, "c2": 0, "dim_base": 0},
            "classes": {"e1": {"coords": [1], "degree_rel": 1}},
            "tasks": [{"kind": "pair", "a": "e1", "b": "e9"}]
        }"#,
    )
    .unwrap();
    let result = run_with(&["run", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("tasks[0].b"), "stderr: {stderr}");
    assert!(stderr.contains("e9"), "stderr: {stderr}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.json");
    std::fs::write(&config, "{ not json").unwrap();
    let result = run_with(&["run", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line"), "stderr: {stderr}");
}

#[test]
fn failed_expectation_exits_one_and_reports_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("fail.json");
    let out = dir.path().join("report.txt");
    std::fs::write(
        &config,
        r#"{
            "truncation": 4,
            "geometry": {"gram": [[-1]], "canonical": [0], "p_g": 0, "q": 0, "c2": 0, "dim_base": 0},
            "classes": {"e1": {"coords": [1], "degree_rel": 1}},
            "tasks": [{"kind": "pair", "a": "e1", "b": "e1", "expect": "5"}]
        }"#,
    )
    .unwrap();
    let result = run_with(&[
        "run",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("check expect fail: got -1, expected 5"));
    assert!(report.contains("overall fail"));
}

#[test]
fn runtime_error_in_a_task_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("odd.json");
    let out = dir.path().join("report.txt");
    std::fs::write(
        &config,
        r#"{
            "truncation": 4,
            "geometry": {"gram": [[-1]], "canonical": [0], "p_g": 0, "q": 0, "c2": 0, "dim_base": 0},
            "tasks": [{"kind": "adjunction_delta", "l_sq": 3}]
        }"#,
    )
    .unwrap();
    let result = run_with(&[
        "run",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.contains("error = adjunction requires an even self-intersection"));
}

#[test]
fn check_only_validates_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.txt");
    let result = run_sample("7", &out, &["--check-only"]);
    assert!(result.status.success());
    assert!(!out.exists());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("configuration valid"));
}

#[test]
fn yau_zaslow_table_export() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("table.json");
    let out = dir.path().join("report.txt");
    let table = dir.path().join("series.txt");
    std::fs::write(
        &config,
        format!(
            r#"{{
                "truncation": 4,
                "geometry": {{"gram": [[-1]], "canonical": [0], "p_g": 0, "q": 0, "c2": 0, "dim_base": 0}},
                "tasks": [{{"kind": "yau_zaslow", "c2": 24, "delta_max": 3, "table_path": {:?}}}]
            }}"#,
            table.to_str().unwrap()
        ),
    )
    .unwrap();
    let result = run_with(&[
        "run",
        config.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    assert_eq!(
        std::fs::read_to_string(&table).unwrap(),
        "0 1\n1 24\n2 324\n3 3200\n"
    );
}

#[test]
fn report_classes_reparse_to_equal_values() {
    use resint_core::ring::{GradedClass, RingContext};
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let result = run_sample("11", &out, &[]);
    assert!(result.status.success());
    let report = std::fs::read_to_string(&out).unwrap();
    // the context must match docs/sample-job.json
    let ctx = RingContext::new(
        &[
            ("z", 1),
            ("h1", 1),
            ("nd", 1),
            ("g1", 1),
            ("g2", 2),
            ("cpg", 1),
        ],
        8,
    )
    .unwrap();
    let mut seen = 0;
    for line in report.lines() {
        let line = line.trim_start();
        if let Some(rest) = line.strip_prefix("class ") {
            let (_, rendered) = rest.split_once(" = ").expect("class line shape");
            let parsed = GradedClass::parse(&ctx, rendered).expect("report class parses");
            assert_eq!(parsed.to_string(), rendered, "canonical form is stable");
            seen += 1;
        }
    }
    assert!(seen >= 8, "expected several class lines, saw {seen}");
}
