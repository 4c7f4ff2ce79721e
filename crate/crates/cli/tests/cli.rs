//! End-to-end tests of the `ergm-phase` binary: flag handling, exit
//! codes, output stability and the file/environment interfaces.

use std::collections::HashMap;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergm-phase"))
}

fn run(args: &[&str]) -> Output {
    run_env(args, &HashMap::new())
}

fn run_env(args: &[&str], envs: &HashMap<&str, &str>) -> Output {
    let mut cmd = bin();
    cmd.args(args).env_remove("ERGM_PHASE_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn ergm-phase")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Cells of the first data row, keyed by header name.
fn first_row(csv: &str) -> HashMap<String, String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    header
        .iter()
        .zip(row)
        .map(|(h, c)| (h.to_string(), c.to_string()))
        .collect()
}

#[test]
fn classify_on_curve_point() {
    let out = run(&["classify", "--beta1", "-2.5", "--beta2", "2.5", "--p", "2"]);
    assert!(out.status.success());
    let row = first_row(&stdout(&out));
    assert_eq!(row["regime"], "on-curve");
    let alpha: f64 = row["mixture_weight"].parse().unwrap();
    assert!((alpha - 0.5).abs() < 1e-9);
    let x1: f64 = row["x1"].parse().unwrap();
    let x2: f64 = row["x2"].parse().unwrap();
    assert!((x1 + x2 - 1.0).abs() < 1e-9);
}

#[test]
fn classify_off_curve_limits() {
    let out = run(&["classify", "--beta1", "0", "--beta2", "0", "--p", "2"]);
    assert!(out.status.success());
    let row = first_row(&stdout(&out));
    assert_eq!(row["regime"], "off-curve");
    let var_edge: f64 = row["var_edge_limit"].parse().unwrap();
    assert!((var_edge - 0.25).abs() < 1e-12);
    // No second maximizer and no mixture weight off the curve.
    assert_eq!(row["x2"], "");
    assert_eq!(row["mixture_weight"], "");
}

#[test]
fn classify_critical_point() {
    let out = run(&["classify", "--beta1", "-2", "--beta2", "2", "--p", "2"]);
    let row = first_row(&stdout(&out));
    assert_eq!(row["regime"], "critical");
    let exponent: f64 = row["scale_exponent"].parse().unwrap();
    assert!((exponent - 0.5).abs() < 1e-15);
}

#[test]
fn free_energy_trivial_point() {
    let out = run(&[
        "free-energy",
        "--beta1",
        "0",
        "--beta2",
        "0",
        "--p",
        "2",
        "--n",
        "100",
    ]);
    assert!(out.status.success());
    let row = first_row(&stdout(&out));
    let psi: f64 = row["psi_n"].parse().unwrap();
    assert!((psi - std::f64::consts::LN_2).abs() < 1e-13);
    let gap: f64 = row["gap"].parse().unwrap();
    assert!(gap < 1e-12);
}

#[test]
fn free_energy_gap_decreases_along_grid() {
    let out = run(&[
        "free-energy",
        "--beta1",
        "-1.5",
        "--beta2",
        "1.5",
        "--p",
        "2",
        "--n-grid",
        "1e3,1e4,1e5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let gaps: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "gaps = {gaps:?}");
}

#[test]
fn usage_errors_exit_2() {
    // Missing required flag.
    let out = run(&["classify", "--beta1", "0", "--beta2", "0"]);
    assert_eq!(out.status.code(), Some(2));
    // Star order below 2.
    let out = run(&["classify", "--beta1", "0", "--beta2", "0", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // n and n-grid are mutually exclusive.
    let out = run(&[
        "free-energy",
        "--beta1",
        "0",
        "--beta2",
        "0",
        "--p",
        "2",
        "--n",
        "10",
        "--n-grid",
        "10,20",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_3() {
    // Exceeds the weight-table cap.
    let out = run(&[
        "free-energy",
        "--beta1",
        "0",
        "--beta2",
        "0",
        "--p",
        "2",
        "--n",
        "1e9",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("resource limit"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "scaling",
        "--beta1",
        "-1.5",
        "--beta2",
        "1.5",
        "--p",
        "2",
        "--n-grid",
        "50,100",
        "--replicas",
        "200",
        "--seed",
        "7",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with('\n'));
    assert!(!stdout(&a).contains('\r'));
}

#[test]
fn json_output_mirrors_records() {
    let out = run(&[
        "classify",
        "--beta1",
        "-2.5",
        "--beta2",
        "2.5",
        "--p",
        "2",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.trim_start().starts_with('['));
    assert!(text.trim_end().ends_with(']'));
    assert!(text.contains("\"regime\": \"on-curve\""));
    assert!(text.contains("\"mixture_weight\": "));
    assert!(!text.to_lowercase().contains("nan"));
    assert!(!text.to_lowercase().contains("inf"));
}

#[test]
fn out_file_is_written_atomically() {
    let dir = std::env::temp_dir().join(format!("ergm-phase-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("classify.csv");
    let out = run(&[
        "classify",
        "--beta1",
        "0",
        "--beta2",
        "0",
        "--p",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    let direct = run(&["classify", "--beta1", "0", "--beta2", "0", "--p", "2"]);
    assert_eq!(written, stdout(&direct));
    // No stray temp files left behind.
    let leftovers: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains("tmp"))
        .collect();
    assert!(leftovers.is_empty());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn curve_skips_points_above_critical_with_warning() {
    let out = run(&[
        "curve", "--p", "2", "--from", "-1", "--to", "-3", "--step", "0.1",
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let beta1: f64 = line.split(',').next().unwrap().parse().unwrap();
        assert!(beta1 < -2.0, "row with beta1 = {beta1} above the critical point");
        let beta2: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((beta1 + beta2).abs() < 1e-8);
    }
    assert!(text.lines().count() > 5);
}

#[test]
fn curve_entirely_above_critical_is_an_error() {
    let out = run(&[
        "curve", "--p", "2", "--from", "-1", "--to", "-1.5", "--step", "0.3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_resolution_flag_beats_environment() {
    let base = [
        "scaling", "--beta1", "0", "--beta2", "0", "--p", "2", "--n-grid", "50", "--replicas",
        "100",
    ];
    let env_a: HashMap<&str, &str> = [("ERGM_PHASE_SEED", "11")].into();
    let env_b: HashMap<&str, &str> = [("ERGM_PHASE_SEED", "12")].into();
    let a = run_env(&base, &env_a);
    let b = run_env(&base, &env_b);
    assert!(a.status.success() && b.status.success());
    // Different environment seeds change the Monte Carlo columns.
    assert_ne!(a.stdout, b.stdout);
    // An explicit flag wins over the environment.
    let mut with_flag = base.to_vec();
    with_flag.extend(["--seed", "11"]);
    let c = run_env(&with_flag, &env_b);
    assert_eq!(a.stdout, c.stdout);
    // Unparsable environment seed is a usage error.
    let env_bad: HashMap<&str, &str> = [("ERGM_PHASE_SEED", "pony")].into();
    let d = run_env(&base, &env_bad);
    assert_eq!(d.status.code(), Some(2));
}

#[test]
fn verify_quick_passes_and_negative_control_fails() {
    let ok = run(&["verify", "--quick"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("all 11 checks passed"));
    let bad = run(&["verify", "--quick", "--inject-bad-gamma"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL  gamma-identities"));
}
