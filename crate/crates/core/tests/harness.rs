use std::fs;
use std::path::Path;
use std::process::Command;

use ptkr::harness::{read_table, run, ExperimentConfig, ExperimentKind, ResultTable};

fn config(kind: ExperimentKind, out: &Path, extra: &[&str]) -> ExperimentConfig {
    let mut overrides: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
    overrides.push(format!("out={}", out.display()));
    ExperimentConfig::parse(kind, "", &overrides).unwrap()
}

fn columns(t: &ResultTable) -> Vec<&str> {
    t.columns().iter().map(|c| c.name.as_str()).collect()
}

#[test]
fn evolve_is_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&config(ExperimentKind::Evolve, &dir.path().join("a"), &[])).unwrap();
    let b = run(&config(
        ExperimentKind::Evolve,
        &dir.path().join("b"),
        &["jobs=3"],
    ))
    .unwrap();
    let (ta, tb) = (read_table(&a[0]).unwrap(), read_table(&b[0]).unwrap());
    assert_eq!(ta.data_text(), tb.data_text());

    for name in ["t", "mean_theta", "mean_p", "mean_p_sq", "norm"] {
        assert!(ta.column_index(name).is_some(), "missing {name}");
    }
    assert_eq!(ta.len(), 11);
    assert_eq!(ta.meta("kind"), Some("evolve"));
    assert_eq!(ta.meta_f64("K"), Some(std::f64::consts::TAU));
    assert_eq!(ta.meta_f64("hbar"), Some(0.1));
    assert!(ta.meta("version").is_some() && ta.meta("created_unix").is_some());

    let text = fs::read_to_string(&a[0]).unwrap();
    assert_eq!(ResultTable::parse(&text).unwrap().to_text(), text);
}

#[test]
fn reverse_check_writes_both_directions_and_densities() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run(&config(
        ExperimentKind::ReverseCheck,
        dir.path(),
        &["n_points=4096", "n_kicks=6"],
    ))
    .unwrap();
    assert_eq!(paths.len(), 3);
    let t = read_table(&paths[0]).unwrap();
    assert_eq!(t.len(), 7 + 6);
    assert_eq!(columns(&t)[0], "direction");
    let theta = read_table(&dir.path().join("reverse_density_theta.csv")).unwrap();
    assert_eq!(theta.len(), 4096);
    let w = 2.0 * std::f64::consts::PI / 4096.0;
    let total: f64 = theta.column_f64("reversed").unwrap().iter().sum::<f64>() * w;
    assert!((total - 1.0).abs() < 1e-12);
    let p = read_table(&dir.path().join("reverse_density_p.csv")).unwrap();
    let total: f64 = p.column_f64("initial").unwrap().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn otoc_overlays_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run(&config(
        ExperimentKind::Otoc,
        dir.path(),
        &["t_max=8", "lambda_values=0.9,5", "n_points=8192"],
    ))
    .unwrap();
    let curves = read_table(&paths[0]).unwrap();
    assert_eq!(curves.len(), 16);
    assert_eq!(columns(&curves)[..3], ["lambda", "t", "c1"]);
    let fits = read_table(&paths[1]).unwrap();
    assert_eq!(fits.column_f64("lambda").unwrap(), vec![0.9, 5.0]);
    assert_eq!(fits.meta_f64("fit_end"), Some(8.0));
    let states = read_table(&paths[2]).unwrap();
    assert_eq!(columns(&states), ["theta", "psi_r", "phi_r"]);
}

#[test]
fn scan_writes_one_table_per_k_and_a_staircase() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        ExperimentKind::ScanK,
        dir.path(),
        &["k_values=2pi,4pi", "t_max=8", "jobs=2", "n_points=8192"],
    );
    let paths = run(&cfg).unwrap();
    assert_eq!(paths.len(), 3);
    assert!(dir.path().join("scan_k/k_00.csv").exists());
    assert!(dir.path().join("scan_k/k_01.csv").exists());
    let stairs = read_table(&dir.path().join("staircase.csv")).unwrap();
    assert_eq!(stairs.column_f64("plateau").unwrap(), vec![1.0, 2.0]);
    let d = stairs.column_f64("D").unwrap();
    assert!((d[1] / d[0] - 2.0).abs() < 0.05);
    assert!(stairs.meta_f64("reference_nu").is_some());

    let again = run(&config(
        ExperimentKind::ScanK,
        &dir.path().join("serial"),
        &["k_values=2pi,4pi", "t_max=8", "jobs=1", "n_points=8192"],
    ))
    .unwrap();
    assert_eq!(
        read_table(&again[2]).unwrap().data_text(),
        stairs.data_text()
    );
}

#[test]
fn classical_table_holds_integer_multiples() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run(&config(
        ExperimentKind::Classical,
        dir.path(),
        &["k_values=2pi,8,14", "n_kicks=5"],
    ))
    .unwrap();
    let t = read_table(&paths[0]).unwrap();
    assert_eq!(t.len(), 3 * 6);
    let p = t.column_f64("p").unwrap();
    let d = t.column_f64("D_predicted").unwrap();
    let n = t.column_f64("n").unwrap();
    for i in 0..t.len() {
        assert_eq!(p[i], d[i] * n[i]);
    }
}

#[test]
fn oracle_check_reports_tiny_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let paths = run(&config(
        ExperimentKind::OracleCheck,
        dir.path(),
        &["oracle_points=64"],
    ))
    .unwrap();
    let t = read_table(&paths[0]).unwrap();
    assert!(t.column_f64("deviation").unwrap().iter().all(|d| *d < 1e-9));
    assert!(t.column_f64("pass").unwrap().iter().all(|p| *p == 1.0));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = run(&config(
        ExperimentKind::Classical,
        &blocker.join("sub"),
        &[],
    ))
    .unwrap_err();
    assert_eq!(err.category(), "io");
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ptkr"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

#[test]
fn cli_runs_with_config_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "n_points = 4096\n[evolve]\nn_kicks = 3\nK = 8\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "lambda=1.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&out.join("evolve.csv")).unwrap();
    assert_eq!(t.len(), 4);
    assert_eq!(t.meta_f64("K"), Some(8.0));
    assert_eq!(t.meta_f64("lambda"), Some(1.2));
    assert_eq!(t.meta("n_points"), Some("4096"));
}

#[test]
fn cli_errors_are_one_categorized_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for (args, category, field) in [
        (
            vec!["evolve", "--set", "sigma=-2", "--out", out],
            "invalid-parameter",
            "sigma",
        ),
        (
            vec!["evolve", "--set", "sigma=abc", "--out", out],
            "invalid-config",
            "sigma",
        ),
        (
            vec!["scan-k", "--set", "bogus=1", "--out", out],
            "invalid-config",
            "bogus",
        ),
        (
            vec!["otoc", "--config", "/nonexistent/cfg", "--out", out],
            "io",
            "nonexistent",
        ),
        (
            vec![
                "evolve", "--set", "K=700", "--set", "lambda=1", "--out", out,
            ],
            "parameter-overflow",
            "lambda",
        ),
    ] {
        let o = cli(&args);
        assert!(!o.status.success());
        let stderr = String::from_utf8_lossy(&o.stderr);
        let lines: Vec<&str> = stderr.lines().collect();
        assert_eq!(lines.len(), 1, "{stderr}");
        assert!(
            lines[0].starts_with(&format!("error: {category}: ")),
            "{stderr}"
        );
        assert!(lines[0].contains(field), "{stderr}");
    }
}
