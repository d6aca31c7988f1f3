//! End-to-end runs of the `bh` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bh(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bh"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("bh runs")
}

fn run_ok(args: &[&str]) -> TempDir {
    let dir = TempDir::new().unwrap();
    let out = bh(args, dir.path());
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn csv(dir: &Path, name: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(dir.join(name)).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn column(rows: &[Vec<String>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

fn check_densities(dir: &Path) {
    let (header, rows) = csv(dir, "densities.csv");
    assert_eq!(header[0], "x");
    let x = column(&rows, 0);
    for k in 1..header.len() {
        let area = trapezoid(&x, &column(&rows, k));
        assert!((area - 1.0).abs() < 1e-6, "{} integrates to {area}", header[k]);
    }
}

fn digest(dir: &Path, names: &[&str]) -> String {
    let mut h = Sha256::new();
    for name in names {
        h.update(fs::read(dir.join(name)).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn stereo_project_writes_panels_and_densities() {
    let dir = run_ok(&["stereo-project", "--z", "1.6"]);
    check_densities(dir.path());
    let (header, rows) = csv(dir.path(), "panels.csv");
    assert_eq!(header, ["panel", "measure_mean", "measure_var", "mean", "var", "positive_definite", "kl", "divergence"]);
    assert_eq!(rows.len(), 2);
    let s = summary(dir.path());
    assert_eq!(s["z"], 1.6);
    assert_eq!(s["second_measure_closer"], true);
}

#[test]
fn stereo_project_is_reproducible() {
    let names = ["densities.csv", "panels.csv", "summary.json"];
    let a = run_ok(&["stereo-project", "--seed", "1"]);
    let b = run_ok(&["stereo-project", "--seed", "1"]);
    assert_eq!(digest(a.path(), &names), digest(b.path(), &names));
    assert_eq!(digest(a.path(), &names), STEREO_PROJECT_SHA256);
}

// Pinned on x86_64 Linux; libm differences elsewhere may change the last digits.
const STEREO_PROJECT_SHA256: &str = "c5632af1f99eb635d733274d8251014e064806a8bb7ccb00a6e75c3c9aa1fe80";

#[test]
fn stereo_iterate_series() {
    let dir = run_ok(&["stereo-iterate", "--max-iters", "4"]);
    check_densities(dir.path());
    let (header, rows) = csv(dir.path(), "kl_series.csv");
    assert_eq!(header, ["iteration", "mean", "var", "kl", "divergence", "step_norm"]);
    assert_eq!(rows.len(), 4);
    let s = summary(dir.path());
    assert_eq!(s["series"]["kl"].as_array().unwrap().len(), 4);
}

#[test]
fn hermite_sweep_decreases() {
    let dir = run_ok(&["hermite-sweep", "--basis", "4"]);
    check_densities(dir.path());
    let (header, rows) = csv(dir.path(), "sweep.csv");
    assert_eq!(header, ["order", "divergence", "kl"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(summary(dir.path())["strictly_decreasing"], true);
}

#[test]
fn hermite_iterate_has_both_orders() {
    let dir = run_ok(&["hermite-iterate", "--max-iters", "3"]);
    let (header, rows) = csv(dir.path(), "kl_series.csv");
    assert_eq!(header[0], "order");
    let orders: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(orders, ["2", "2", "2", "4", "4", "4"]);
}

#[test]
fn gvi_demo_from_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("demo.conf");
    fs::write(&cfg, "# small run\ntrials = 5\nposes = 10\nlandmarks = 3\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bh(&["gvi-demo", "--config", cfg.to_str().unwrap()], &out_dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["graph.txt", "variables.csv", "esgvi_trace.csv", "map_trace.csv", "summary.json"] {
        assert!(out_dir.join(name).exists(), "{name}");
    }
    let (_, rows) = csv(&out_dir, "variables.csv");
    assert_eq!(rows.len(), 13);
    let s = summary(&out_dir);
    assert_eq!(s["config"]["trials"], 5);
    assert_eq!(s["monte_carlo"]["trials"], 5);
    assert!(s["route_gap"].as_f64().unwrap() < 1e-10);
    assert!(fs::read_to_string(out_dir.join("graph.txt")).unwrap().starts_with("VAR 13"));
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("s.conf");
    fs::write(&cfg, "max_iters = 2\nz = 1.6\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bh(&["stereo-iterate", "--config", cfg.to_str().unwrap(), "--max-iters", "3"], &out_dir);
    assert!(out.status.success());
    let s = summary(&out_dir);
    assert_eq!(s["config"]["max_iters"], 3);
    assert_eq!(s["z"], 1.6);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["stereo-project", "--nodes", "3"][..],
        &["gvi-demo", "--basis", "3"][..],
        &["hermite-sweep", "--basis", "1"][..],
    ] {
        let out = bh(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "colour = blue\n").unwrap();
    let out = bh(&["stereo-project", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    let out = bh(&["stereo-iterate", "--z=-5"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("error.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "numerical_failure");
    assert!(!report["message"].as_str().unwrap().is_empty());
}
