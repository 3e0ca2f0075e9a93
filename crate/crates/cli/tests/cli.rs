use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn swdlsim(args: &[&str], config: &str, dir: &Path) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_swdlsim"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env_remove("SWDLSIM_OUT")
        .output()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn empty_config_runs_with_defaults() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = swdlsim(&["analytic-switchtime", "--out", out.to_str().unwrap()], "", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("analytic_switchtime.csv")).unwrap();
    assert!(csv.starts_with("ts_ratio,extra_il_db,"));
    assert_eq!(column(&csv, "extra_il_db")[0], 0.0);
}

#[test]
fn unknown_key_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let o = swdlsim(&["repro-fig7", "--out", dir.path().to_str().unwrap()], "switch.r_on = 3\n", dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_on"));
}

#[test]
fn dd_ratio_of_one_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = swdlsim(&["repro-fig7", "--out", dir.path().to_str().unwrap()], "sweep.dd_ratios = [0.5, 1.0]\n", dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.dd_ratios"));
    assert!(!dir.path().join("fig7_il.csv").exists());
}

#[test]
fn fig7_curves_are_monotone() {
    let dir = TempDir::new().unwrap();
    let o = swdlsim(&["repro-fig7", "--out", dir.path().to_str().unwrap()], "", dir.path());
    assert!(o.status.success());
    let il = column(&fs::read_to_string(dir.path().join("fig7_il.csv")).unwrap(), "il_db");
    let iso = column(&fs::read_to_string(dir.path().join("fig7_isolation.csv")).unwrap(), "isolation_db");
    assert!(il.windows(2).all(|w| w[1] > w[0]));
    assert!(iso.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = "sweep.f_start_hz = 150e6\nsweep.f_stop_hz = 153e6\nsweep.f_step_hz = 1e6\n";
    let mut runs = Vec::new();
    for jobs in ["1", "3"] {
        let out = dir.path().join(jobs);
        let o = swdlsim(&["sim-sparams", "--jobs", jobs, "--out", out.to_str().unwrap()], cfg, dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(fs::read(out.join("sparams.csv")).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn fig17_reports_the_reference_pass_band() {
    let dir = TempDir::new().unwrap();
    let o = swdlsim(&["repro-fig17", "--out", dir.path().to_str().unwrap()], "", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("fig17_summary.csv")).unwrap();
    let il = column(&summary, "min_il_db")[0];
    let iso = column(&summary, "min_isolation_db")[0];
    assert!((il - 5.6).abs() <= 1.0, "{il}");
    assert!(iso >= 24.0, "{iso}");
}

#[test]
fn bounce_delivers_to_port_two_one_delay_later() {
    let dir = TempDir::new().unwrap();
    let o = swdlsim(&["sim-bounce", "--out", dir.path().to_str().unwrap()], "", dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("bounce.csv")).unwrap();
    let delta = 285e-9;
    let mut delivered = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[9], "delivered:2", "{line}");
        let start: f64 = f[3].parse().unwrap();
        let arrival: f64 = f[5].parse().unwrap();
        assert!((arrival - start - delta).abs() < 1e-15);
        assert!((start / (2.0 * delta) - (start / (2.0 * delta)).round()).abs() < 1e-9);
        delivered += 1;
    }
    assert!(delivered >= 6);
}

#[test]
fn simulation_abort_exits_with_three_and_leaves_no_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let cfg = "engine.max_iterations = 1\nsweep.f_start_hz = 155e6\nsweep.f_stop_hz = 156e6\n";
    let o = swdlsim(&["sim-sparams", "--out", out.to_str().unwrap()], cfg, dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("sparams.csv").exists());
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_swdlsim"))
        .args(["analytic-deviation", "--format", "csv,svg"])
        .env("SWDLSIM_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("analytic_deviation.csv").exists());
    assert!(fs::read_to_string(out.join("analytic_deviation.svg")).unwrap().starts_with("<svg"));
}
