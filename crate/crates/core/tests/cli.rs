//! End-to-end tests of the `ftflow` binary: exit codes, diagnostics, and
//! emitted files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ftflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftflow"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.txt");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SCALAR_FINITE: &str = "\
problem = scalar
mu = 1.0
scaling.variant = finite
scaling.eta = 1.0
scaling.lambda = 0.5
t_max = 10
magnitudes = 1, 10
";

#[test]
fn missing_required_key_exits_2_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = scalar\n");
    let out = ftflow(&["run", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mu"), "stderr should name the missing key: {stderr}");
}

#[test]
fn unknown_config_key_exits_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "problem = scalar\nmu = 1\nwhat = 3\n");
    let out = ftflow(&["run", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3") && stderr.contains("what"), "{stderr}");
}

#[test]
fn unknown_figure_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ftflow(&["reproduce", "fig9", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ftflow(&[
        "run",
        "--config",
        tmp.path().join("nope.txt").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scalar_run_emits_monotone_trajectory_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SCALAR_FINITE);
    let out_dir = tmp.path().join("out");
    let out = ftflow(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("trajectory_0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,err_rel,field_norm,sigma,V_surrogate");
    let errs: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(errs.len() > 2);
    assert!(errs.first().unwrap() > errs.last().unwrap());
    for pair in errs.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-9, "err_rel should not increase: {pair:?}");
    }

    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("command:"), "{manifest}");
    assert!(manifest.contains("trajectory_0.csv"), "{manifest}");
}

#[test]
fn sweep_emits_exact_header_and_settles() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SCALAR_FINITE);
    let out_dir = tmp.path().join("out");
    let out = ftflow(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "magnitude,settling_time,thm_bound,final_err_rel,terminated_by"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let settling: f64 = fields[1].parse().unwrap();
        let bound: f64 = fields[2].parse().unwrap();
        assert!(settling.is_finite() && settling > 0.0);
        assert!(bound >= settling, "bound {bound} should dominate settling {settling}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SCALAR_FINITE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = ftflow(&["run", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["trajectory_0.csv", "trajectory_1.csv"] {
        let fa = fs::read(a.join(name)).unwrap();
        let fb = fs::read(b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} should be byte-identical across reruns");
    }
}
