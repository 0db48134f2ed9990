//! Black-box tests of the `holonomy` binary: flag handling, config file
//! precedence, output formats, and the documented exit codes (0 ok,
//! 2 usage, 3 I/O, 4 numerical).

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_holonomy"));
    // Keep the environment out of the picture unless a test opts in.
    cmd.env_remove("HOLONOMY_WORKERS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn holonomy")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_prints_a_summary() {
    let out = run(&[
        "simulate",
        "--gate",
        "H",
        "--beta-over-f",
        "0.2",
        "--n-states",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mean fidelity"), "{text}");
    assert!(text.contains("mean infidelity"), "{text}");
}

#[test]
fn sweep_beta_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep-beta",
        "--gate",
        "X",
        "--gamma-over-fi",
        "1e-3",
        "--points",
        "3",
        "--n-states",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "beta_over_fi,gamma_over_fi,mean_inf,min_inf,max_inf,rwa_mean_inf"
    );
    assert_eq!(lines.count(), 3);
    // Every value is scientific notation with a dotted mantissa.
    for field in text.lines().nth(1).unwrap().split(',') {
        assert!(field.contains('e') && field.contains('.'), "field {field}");
    }
}

#[test]
fn missing_gate_is_a_usage_error() {
    let out = run(&["sweep-beta", "--points", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gate"), "{}", stderr(&out));
}

#[test]
fn unknown_gate_is_a_usage_error() {
    let out = run(&["simulate", "--gate", "warp"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("warp"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"gate": "X", "bogus-knob": 3}"#).unwrap();
    let out = run(&["sweep-beta", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus-knob"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"gate": "X", "points": 4, "n-states": 2, "beta-min": 0.1, "beta-max": 0.5}"#,
    )
    .unwrap();
    let from_file = dir.path().join("file.csv");
    let out = run(&[
        "sweep-beta",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = std::fs::read_to_string(&from_file).unwrap();
    assert_eq!(rows.lines().count(), 5, "4 config points plus header");
    assert!(rows.lines().nth(1).unwrap().starts_with("1.0e-1,"));

    let overridden = dir.path().join("flag.csv");
    let out = run(&[
        "sweep-beta",
        "--config",
        cfg.to_str().unwrap(),
        "--points",
        "2",
        "--out",
        overridden.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = std::fs::read_to_string(&overridden).unwrap();
    assert_eq!(rows.lines().count(), 3, "flag points beat config points");
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = run(&[
        "sample-sphere",
        "--n",
        "4",
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_parameter_is_a_usage_error() {
    let out = run(&["sample-sphere", "--n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_sphere_writes_unit_vectors_to_stdout() {
    let out = run(&["sample-sphere", "--n", "7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,y,z");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        assert!((norm - 1.0).abs() <= 1e-12, "{line}");
    }
}

#[test]
fn opt_beta_reports_one_row_per_decay_rate() {
    let out = run(&[
        "opt-beta",
        "--gate",
        "X",
        "--gamma-over-fi",
        "1e-3",
        "--gamma-over-fi",
        "1e-2",
        "--points",
        "4",
        "--n-states",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma_over_fi,beta_opt_over_fi,mean_inf");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1.0e-3,"));
    assert!(lines[2].starts_with("1.0e-2,"));
}

#[test]
fn freq_grid_emits_grid_and_ridge() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let ridge = dir.path().join("ridge.csv");
    let out = run(&[
        "freq-grid",
        "--gate",
        "Z",
        "--points",
        "3",
        "--f-min",
        "4",
        "--f-max",
        "12",
        "--n-states",
        "2",
        "--out",
        grid.to_str().unwrap(),
        "--ridge-out",
        ridge.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let grid_text = std::fs::read_to_string(&grid).unwrap();
    assert_eq!(
        grid_text.lines().next().unwrap(),
        "f0e_over_beta,f1e_over_beta,mean_inf"
    );
    assert_eq!(grid_text.lines().count(), 10, "3x3 grid plus header");
    let ridge_text = std::fs::read_to_string(&ridge).unwrap();
    assert_eq!(
        ridge_text.lines().next().unwrap(),
        "f0e_over_beta,f1e_opt_over_beta,mean_inf"
    );
    assert_eq!(ridge_text.lines().count(), 4);
}

#[test]
fn freq_ratio_csv_has_rwa_reference_column() {
    let out = run(&[
        "freq-ratio",
        "--gate",
        "Z",
        "--points",
        "3",
        "--ratio-min",
        "0.8",
        "--ratio-max",
        "1.2",
        "--n-states",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "f1e_over_f0e,gamma_over_beta,mean_inf,min_inf,max_inf,rwa_mean_inf"
    );
    // The RWA column ignores the frequencies, so it is constant.
    let rwa: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert!(rwa.windows(2).all(|w| w[0] == w[1]), "{rwa:?}");
}

#[test]
fn cz_sweep_runs_without_a_gate_flag() {
    let out = run(&["cz-sweep", "--points", "2", "--beta-min", "0.05", "--beta-max", "0.2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "beta_over_fi,gamma_over_fi,mean_inf,min_inf,max_inf,rwa_mean_inf"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn svg_plot_is_written_for_line_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let out = run(&[
        "sweep-beta",
        "--gate",
        "X",
        "--points",
        "4",
        "--n-states",
        "2",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg "));
    assert!(text.contains("<polyline"));
    assert!(text.contains("beta / f"));
    // Log-spaced beta grid gets decade ticks.
    assert!(text.contains("1e-1"), "{text}");
}

#[test]
fn freq_grid_has_no_svg_flag() {
    // Grids export CSV only; the flag does not exist on this subcommand.
    let out = run(&["freq-grid", "--gate", "Z", "--svg", "/tmp/grid.svg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn workers_env_is_honored_and_validated() {
    let out = bin()
        .env("HOLONOMY_WORKERS", "2")
        .args([
            "sweep-beta",
            "--gate",
            "X",
            "--points",
            "2",
            "--n-states",
            "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let out = bin()
        .env("HOLONOMY_WORKERS", "donkey")
        .args([
            "sweep-beta",
            "--gate",
            "X",
            "--points",
            "2",
            "--n-states",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("HOLONOMY_WORKERS"));
}

#[test]
fn unreachable_tolerance_is_a_numerical_error() {
    let out = run(&[
        "simulate",
        "--gate",
        "X",
        "--n-states",
        "2",
        "--rel-tol",
        "1e-300",
        "--abs-tol",
        "1e-310",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("step"), "{}", stderr(&out));
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for sub in [
        "simulate",
        "sweep-beta",
        "opt-beta",
        "freq-grid",
        "freq-ratio",
        "cz-sweep",
        "sample-sphere",
    ] {
        assert!(text.contains(sub), "help is missing {sub}");
    }
}

#[test]
fn config_path_must_exist() {
    let out = run(&["simulate", "--gate", "X", "--config", "/no/such/cfg.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!Path::new("/no/such/cfg.json").exists());
}
