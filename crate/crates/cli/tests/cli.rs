use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tfgnav(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfgnav"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("NAV_SEED")
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn simulate_writes_summary_and_rmse_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tfgnav(&["simulate", "--runs", "3", "--workers", "2"], tmp.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let json = summary(tmp.path());
    let keys: Vec<&str> = json
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    assert_eq!(keys, ["config", "convergence", "rmse", "seed", "version"]);
    assert_eq!(json["seed"], 2024);
    assert_eq!(json["config"]["scenario"]["n_runs"], 3);
    assert_eq!(json["convergence"].as_array().unwrap().len(), 3);

    for kind in ["tfg_iekf", "imperfect_iekf", "ekf"] {
        let csv = std::fs::read_to_string(tmp.path().join(format!("rmse_{kind}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time_s,rmse_yaw_rad,rmse_pos_m,rmse_scale,rmse_lever_m"
        );
        assert_eq!(lines.count(), 1201);
    }
    assert!(!tmp.path().join("runs").exists());

    let stdout = String::from_utf8_lossy(&out.stdout);
    for label in ["TFG-IEKF", "Imp. IEKF", "EKF"] {
        assert!(stdout.contains(label), "{stdout}");
    }
}

#[test]
fn timeseries_flag_writes_per_run_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tfgnav(
        &[
            "simulate",
            "--runs",
            "2",
            "--filters",
            "tfg_iekf,ekf",
            "--timeseries",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let runs = tmp.path().join("runs");
    let mut names: Vec<String> = std::fs::read_dir(&runs)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "run_0_ekf.csv",
            "run_0_tfg_iekf.csv",
            "run_1_ekf.csv",
            "run_1_tfg_iekf.csv"
        ]
    );
    let csv = std::fs::read_to_string(runs.join("run_1_ekf.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "time_s,err_yaw_rad,env_3sigma_rad,err_pos_m,err_scale,err_lever_m,verdict"
    );
    let last = csv.lines().last().unwrap();
    assert!(last.ends_with(",convergent") || last.ends_with(",divergent"));
    assert!(!tmp.path().join("rmse_imperfect_iekf.csv").exists());
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(
        tfgnav(&["table1", "--runs", "4", "--workers", "1"], a.path())
            .status
            .success()
    );
    assert!(
        tfgnav(&["table1", "--runs", "4", "--workers", "3"], b.path())
            .status
            .success()
    );
    for file in ["summary.json", "rmse_tfg_iekf.csv", "rmse_ekf.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs");
    }
}

#[test]
fn flags_override_config_file_and_env_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "scenario.sigma_att0_deg = 100\nscenario.n_runs = 2\nscenario.seed = 11\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_tfgnav"))
        .args(["simulate", "--sigma-att0", "200", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .env("NAV_SEED", "33")
        .output()
        .unwrap();
    assert!(out.status.success());
    let json = summary(&out_dir);
    assert_eq!(json["config"]["scenario"]["sigma_att0_deg"], 200.0);
    assert_eq!(json["config"]["scenario"]["n_runs"], 2);
    assert_eq!(json["seed"], 33);
}

#[test]
fn table1_preset_uses_two_hundred_degrees() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(tfgnav(&["table1", "--runs", "1"], tmp.path())
        .status
        .success());
    assert_eq!(
        summary(tmp.path())["config"]["scenario"]["sigma_att0_deg"],
        200.0
    );
}

#[test]
fn bad_configuration_exits_nonzero_with_named_field() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tfgnav(&["simulate", "--runs", "-5"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--runs"));

    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "noise.sigma_gyro = 1\n").unwrap();
    let out = tfgnav(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("noise.sigma_gyro"));
    assert!(!tmp.path().join("summary.json").exists());
}

#[test]
fn check_subcommand_reports_every_suite() {
    let out = Command::new(env!("CARGO_BIN_EXE_tfgnav"))
        .args(["check", "--samples", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.lines().filter(|l| l.starts_with("[PASS]")).count() >= 20,
        "{stdout}"
    );
    assert!(stdout.contains("0 failed"));
}
