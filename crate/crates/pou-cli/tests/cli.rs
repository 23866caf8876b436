//! End-to-end checks of the runners and the binary: exit codes, artifact
//! shapes, flag overrides, and pipeline determinism at reduced scale.

use std::process::Command;

use pou_cli::config::{ExperimentKind, ScheduleConfig};
use pou_cli::experiments::{self, example_config_1d, example_config_2d};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pou"))
}

#[test]
fn check_model_two_class_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_2d();
    cfg.experiment = ExperimentKind::CheckModel;
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed, "summary: {}", out.summary);
    let report = std::fs::read_to_string(dir.path().join("model_report.csv")).unwrap();
    assert!(report.starts_with("key,value\n"));
    assert!(report.contains("m_matrix,true"));
    assert!(report.contains("assumption1_branch,diagonal_m"));
    assert!(report.contains("theta,1"), "report: {report}");
    assert!(dir.path().join("run_manifest.json").exists());
}

#[test]
fn check_model_reports_failing_assumptions() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_2d();
    cfg.experiment = ExperimentKind::CheckModel;
    cfg.model.gamma = vec![0.0, 0.0];
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(!out.passed);
    let report = std::fs::read_to_string(dir.path().join("model_report.csv")).unwrap();
    assert!(report.contains("assumption1_holds,false"));
    assert!(report.contains("assumption1_branch,neither"));
}

#[test]
fn check_model_flags_omega_boundary() {
    // eta_n = 1/(alpha^2 n) with beta = 1/alpha has omega = alpha, which the
    // admissibility bound omega < alpha * beta * theta = theta rejects here
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_1d(1.5);
    cfg.experiment = ExperimentKind::CheckModel;
    cfg.schedule = ScheduleConfig::AlphaHarmonic { beta: None };
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(!out.passed);
    let report = std::fs::read_to_string(dir.path().join("model_report.csv")).unwrap();
    assert!(report.contains("omega_ok,false"), "report: {report}");
    assert!(report.contains("certificate_found,true"));
}

#[test]
fn sinkhorn_selftest_passes_and_reports_bias_informationally() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_1d(1.5);
    cfg.experiment = ExperimentKind::SinkhornSelftest;
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed, "summary: {}", out.summary);
    let report = std::fs::read_to_string(dir.path().join("sinkhorn_selftest.csv")).unwrap();
    for property in [
        "single_atom_exact,pass",
        "oracle_agreement_tau200,pass",
        "oracle_1d_vs_assignment,pass",
        "marginal_feasibility,pass",
        "symmetry,pass",
        "scale_equivariance,pass",
        "log_vs_raw_kernel,pass",
        "entropic_bias_at_tau,pass",
    ] {
        assert!(report.contains(property), "missing `{property}` in:\n{report}");
    }

    // a tiny regularisation blows up the entropic bias, which is reported
    // as informational without failing the suite
    let dir2 = tempfile::tempdir().unwrap();
    cfg.tau = 0.1;
    cfg.output_dir = dir2.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed);
    let report = std::fs::read_to_string(dir2.path().join("sinkhorn_selftest.csv")).unwrap();
    assert!(report.contains("entropic_bias_at_tau,info-fail"), "report: {report}");
}

#[test]
fn ou_optimality_sweep_shape_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_1d(1.5);
    cfg.experiment = ExperimentKind::OuOptimality;
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    let report = std::fs::read_to_string(dir.path().join("ou_optimality.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next().unwrap(), "alpha,n,eta_n,D_n,ratio");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4 * 50);
    // ratios strictly positive for alpha >= 1.5 over the probed window
    for row in rows.iter().filter(|r| r[0] >= 1.5) {
        assert!(row[4] > 0.0, "alpha {} n {}: ratio {}", row[0], row[1], row[4]);
    }
    // the early-step distortion at alpha = 1.25 drives the distance negative
    // inside the window, so the band flag must fire
    assert!(!out.passed);
    assert!(out.summary.contains("alpha=1.25"), "summary: {}", out.summary);
}

#[test]
fn w1_curve_determinism_across_worker_counts() {
    let mut cfg = example_config_1d(1.5);
    cfg.n_steps = 60;
    cfg.n_trajectories = 40;
    cfg.n_repeats = 2;
    cfg.master_seed = 5;
    let dir1 = tempfile::tempdir().unwrap();
    cfg.workers = 1;
    cfg.output_dir = dir1.path().to_path_buf();
    experiments::run(&cfg).unwrap();
    let dir4 = tempfile::tempdir().unwrap();
    cfg.workers = 4;
    cfg.output_dir = dir4.path().to_path_buf();
    experiments::run(&cfg).unwrap();
    let a = std::fs::read(dir1.path().join("w1_curve.csv")).unwrap();
    let b = std::fs::read(dir4.path().join("w1_curve.csv")).unwrap();
    assert_eq!(a, b, "w1 curve differs across worker counts");
    let header = String::from_utf8_lossy(&a);
    assert!(header.starts_with("k,t_k,eta_k,w1_mean,w1_stddev\n"));
    assert!(dir1.path().join("w1_curve.svg").exists());
}

#[test]
fn clt_runner_writes_consistent_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_1d(1.5);
    cfg.experiment = ExperimentKind::CltCheck;
    cfg.n_steps = 300;
    cfg.n_trajectories = 250;
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed);
    let table = std::fs::read_to_string(dir.path().join("clt.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "chain,time_average,statistic");
    assert_eq!(lines.count(), 250);
    let summary = std::fs::read_to_string(dir.path().join("clt_summary.csv")).unwrap();
    assert!(summary.contains("degenerate"));
    assert!(summary.contains("false"));
}

#[test]
fn clt_constant_test_function_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = example_config_1d(1.5);
    cfg.experiment = ExperimentKind::CltCheck;
    cfg.n_steps = 100;
    cfg.n_trajectories = 250;
    cfg.test_function = pou_cli::config::TestFunctionConfig::One;
    cfg.output_dir = dir.path().to_path_buf();
    let out = experiments::run(&cfg).unwrap();
    assert!(out.passed);
    assert!(out.summary.contains("degenerate"));
    let summary = std::fs::read_to_string(dir.path().join("clt_summary.csv")).unwrap();
    let data_row = summary.lines().nth(1).unwrap();
    assert!(data_row.ends_with(",true"), "summary row: {data_row}");
}

#[test]
fn binary_exit_codes() {
    // missing configuration file -> configuration error -> exit 2
    let status = bin().args(["check-model", "--config", "/nonexistent.json"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // malformed configuration -> exit 2
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"not\": \"a config\"}").unwrap();
    let status = bin().args(["check-model", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    // valid run -> exit 0, artifacts in --out
    let cfg_path = dir.path().join("ok.json");
    let mut cfg = example_config_2d();
    cfg.experiment = ExperimentKind::CheckModel;
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let out_dir = dir.path().join("results");
    let status = bin()
        .args(["check-model", "--config"])
        .arg(&cfg_path)
        .args(["--seed", "7", "--workers", "2", "--out"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out_dir.join("model_report.csv").exists());

    // subcommand / config experiment mismatch -> exit 2
    let status = bin().args(["w1-curve", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
