//! Experiment driver: turns an [`ExperimentConfig`] into result tables on disk.

pub mod config;
pub mod dense;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use log::info;

pub use config::{ExperimentConfig, ExperimentKind};
pub use table::{ColumnType, ResultTable, Value};

use crate::classical::{predicted_d, soliton_trajectory, SolitonState};
use crate::error::{Error, Result};
use crate::otoc::{otoc_series, plateau_index, scan_staircase, time_reversal, OtocSeries, RateFit};
use crate::propagator::{Direction, Floquet, Renormalize, SimParams};
use crate::state::{ObservableSeries, WaveFunction};

use ColumnType::{Float, Int};

/// Run one experiment and return the paths of the tables it wrote.
pub fn run(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let outputs = match config.kind {
        ExperimentKind::Evolve => vec![("evolve.csv".into(), evolve_table(config)?)],
        ExperimentKind::ReverseCheck => reverse_check_tables(config)?,
        ExperimentKind::Otoc => otoc_tables(config)?,
        ExperimentKind::ScanK => scan_tables(config)?,
        ExperimentKind::Classical => vec![("classical.csv".into(), classical_table(config)?)],
        ExperimentKind::OracleCheck => {
            let (table, failures) = oracle_table(config)?;
            let path = write_all(config, vec![("oracle_check.csv".into(), table)])?;
            if failures > 0 {
                return Err(Error::OracleMismatch(format!(
                    "{failures} check(s) exceeded tolerance; see {}",
                    path[0].display()
                )));
            }
            return Ok(path);
        }
    };
    write_all(config, outputs)
}

fn write_all(
    config: &ExperimentConfig,
    outputs: Vec<(String, ResultTable)>,
) -> Result<Vec<PathBuf>> {
    let created = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let mut paths = Vec::with_capacity(outputs.len());
    for (name, mut table) in outputs {
        table.set_meta("version", env!("CARGO_PKG_VERSION"))?;
        table.set_meta("created_unix", created.to_string())?;
        let path = config.out_dir.join(name);
        table.write(&path)?;
        info!("wrote {} ({} rows)", path.display(), table.len());
        paths.push(path);
    }
    Ok(paths)
}

/// Table stamped with the experiment kind and the simulation parameters.
fn new_table(
    kind: ExperimentKind,
    params: &SimParams,
    columns: &[(&str, ColumnType)],
) -> Result<ResultTable> {
    let mut t = ResultTable::new(columns);
    t.set_meta("kind", kind.name())?;
    t.set_meta_f64("K", params.k)?;
    t.set_meta_f64("lambda", params.lambda)?;
    t.set_meta_f64("hbar", params.hbar)?;
    t.set_meta_f64("sigma", params.sigma)?;
    t.set_meta("n_points", params.n_points.to_string())?;
    t.set_meta("n_kicks", params.n_kicks.to_string())?;
    if let Ok(d) = predicted_d(params.k) {
        t.set_meta_f64("predicted_D", d)?;
    }
    Ok(t)
}

fn floquet(params: SimParams) -> Result<Floquet> {
    params.warn_if_unbroken();
    Floquet::from_params(params)
}

const SERIES_COLUMNS: [(&str, ColumnType); 6] = [
    ("t", Int),
    ("mean_theta", Float),
    ("mean_theta_sq", Float),
    ("mean_p", Float),
    ("mean_p_sq", Float),
    ("norm", Float),
];

fn push_series(table: &mut ResultTable, series: &ObservableSeries, prefix: &[Value]) -> Result<()> {
    for i in 0..series.len() {
        let o = series.row(i);
        let mut row = prefix.to_vec();
        row.extend([
            series.times[i].into(),
            o.mean_theta.into(),
            o.mean_theta_sq.into(),
            o.mean_p.into(),
            o.mean_p_sq.into(),
            o.norm.into(),
        ]);
        table.push(row)?;
    }
    Ok(())
}

fn with_initial(psi0: &WaveFunction, series: ObservableSeries) -> Result<ObservableSeries> {
    let mut out = ObservableSeries::with_capacity(series.len() + 1);
    out.push(0, psi0.observables()?);
    for i in 0..series.len() {
        out.push(series.times[i], series.row(i));
    }
    Ok(out)
}

fn evolve_table(config: &ExperimentConfig) -> Result<ResultTable> {
    let f = floquet(config.params)?;
    let psi0 = f.initial_gaussian()?;
    let ev = f.evolve(
        &psi0,
        config.params.n_kicks,
        Direction::Forward,
        config.renormalize,
    )?;
    let mut table = new_table(config.kind, &config.params, &SERIES_COLUMNS)?;
    table.set_meta("renormalize", renormalize_name(config.renormalize))?;
    table.set_meta_f64("log_norm_scale", ev.ledger.log_scale)?;
    push_series(&mut table, &with_initial(&psi0, ev.series)?, &[])?;
    Ok(table)
}

fn renormalize_name(r: Renormalize) -> &'static str {
    match r {
        Renormalize::PerKick => "per-kick",
        Renormalize::Never => "none",
    }
}

fn reverse_check_tables(config: &ExperimentConfig) -> Result<Vec<(String, ResultTable)>> {
    let params = config.params;
    let f = floquet(params)?;
    let psi0 = f.initial_gaussian()?;
    let pass = time_reversal(&f, &psi0, params.n_kicks)?;

    let mut cols = vec![("direction", ColumnType::Text)];
    cols.extend(SERIES_COLUMNS);
    let mut table = new_table(config.kind, &params, &cols)?;
    table.set_meta_f64("pivot_norm", pass.ledger.pivot_norm)?;
    table.set_meta_f64("log_norm_scale", pass.ledger.log_scale())?;
    push_series(
        &mut table,
        &with_initial(&psi0, pass.forward.series.clone())?,
        &["forward".into()],
    )?;
    push_series(&mut table, &pass.backward.series, &["backward".into()])?;

    let states = [&psi0, &pass.forward.state, pass.reversed()];
    let mut theta = new_table(
        config.kind,
        &params,
        &[
            ("theta", Float),
            ("initial", Float),
            ("forward", Float),
            ("reversed", Float),
        ],
    )?;
    let densities: Vec<Vec<f64>> = states.iter().map(|s| theta_density(s)).collect();
    for (j, &t) in psi0.grid().theta_values().iter().enumerate() {
        theta.push(vec![
            t.into(),
            densities[0][j].into(),
            densities[1][j].into(),
            densities[2][j].into(),
        ])?;
    }
    let mut momentum = new_table(
        config.kind,
        &params,
        &[
            ("p", Float),
            ("initial", Float),
            ("forward", Float),
            ("reversed", Float),
        ],
    )?;
    let densities: Vec<Vec<f64>> = states.iter().map(|s| momentum_density(s)).collect();
    for (i, p) in psi0.basis().p_values().into_iter().enumerate() {
        momentum.push(vec![
            p.into(),
            densities[0][i].into(),
            densities[1][i].into(),
            densities[2][i].into(),
        ])?;
    }
    Ok(vec![
        ("reverse_check.csv".into(), table),
        ("reverse_density_theta.csv".into(), theta),
        ("reverse_density_p.csv".into(), momentum),
    ])
}

/// `|psi(theta)|^2 / norm`, a probability density per unit angle.
fn theta_density(psi: &WaveFunction) -> Vec<f64> {
    let norm = psi.norm();
    psi.amplitudes()
        .iter()
        .map(|z| z.norm_sqr() / norm)
        .collect()
}

/// `|c_n|^2 / norm` in ascending momentum order.
fn momentum_density(psi: &WaveFunction) -> Vec<f64> {
    let norm = psi.norm();
    psi.to_momentum()
        .iter()
        .map(|c| c.norm_sqr() / norm)
        .collect()
}

const OTOC_COLUMNS: [(&str, ColumnType); 7] = [
    ("t", Int),
    ("c1", Float),
    ("c2", Float),
    ("c3_re", Float),
    ("c3_im", Float),
    ("c_total", Float),
    ("mean_p", Float),
];

fn push_otoc(table: &mut ResultTable, series: &OtocSeries, prefix: &[Value]) -> Result<()> {
    for (pt, &p) in series.points.iter().zip(&series.forward.mean_p) {
        let mut row = prefix.to_vec();
        row.extend([
            pt.t_n.into(),
            pt.c1.into(),
            pt.c2.into(),
            pt.c3.re.into(),
            pt.c3.im.into(),
            pt.c_total.into(),
            p.into(),
        ]);
        table.push(row)?;
    }
    Ok(())
}

const FIT_COLUMNS: [(&str, ColumnType); 13] = [
    ("K", Float),
    ("lambda", Float),
    ("G", Float),
    ("D", Float),
    ("alpha", Float),
    ("beta", Float),
    ("eta", Float),
    ("nu", Float),
    ("nu_from_parts", Float),
    ("residual", Float),
    ("q_free", Float),
    ("c3_imag_ratio", Float),
    ("D_through_origin", Float),
];

fn fit_row(fit: &RateFit, lambda: f64) -> Vec<Value> {
    vec![
        fit.k.into(),
        lambda.into(),
        fit.g.into(),
        fit.d.into(),
        fit.alpha.into(),
        fit.beta.into(),
        fit.eta.into(),
        fit.nu.into(),
        fit.nu_from_parts().into(),
        fit.residual.into(),
        fit.q_free.into(),
        fit.c3_imag_ratio.into(),
        fit.d_through_origin.into(),
    ]
}

fn set_window_meta(table: &mut ResultTable, config: &ExperimentConfig) -> Result<()> {
    table.set_meta("t_max", config.t_max.to_string())?;
    table.set_meta_f64("fit_start", config.window.start)?;
    table.set_meta_f64("fit_end", config.window.end)
}

fn otoc_tables(config: &ExperimentConfig) -> Result<Vec<(String, ResultTable)>> {
    let mut cols = vec![("lambda", Float)];
    cols.extend(OTOC_COLUMNS);
    let mut curves = new_table(config.kind, &config.params, &cols)?;
    let mut fits = new_table(config.kind, &config.params, &FIT_COLUMNS)?;
    set_window_meta(&mut curves, config)?;
    set_window_meta(&mut fits, config)?;
    let lambdas = config.otoc_lambdas();
    let reference = lambdas
        .iter()
        .position(|&l| l == config.params.lambda)
        .unwrap_or(0);
    let mut states = None;
    for (i, &lambda) in lambdas.iter().enumerate() {
        let params = SimParams {
            lambda,
            ..config.params
        };
        let series = otoc_series(&floquet(params)?, config.t_max)?;
        let fit = RateFit::from_series(&series, config.window)?;
        info!(
            "lambda={lambda}: G={:.4} nu={:.4} residual={:.2e}",
            fit.g, fit.nu, fit.residual
        );
        push_otoc(&mut curves, &series, &[lambda.into()])?;
        fits.push(fit_row(&fit, lambda))?;
        if i == reference {
            states = Some(states_table(config, &params, &series)?);
        }
    }
    Ok(vec![
        ("otoc.csv".into(), curves),
        ("otoc_fit.csv".into(), fits),
        (
            "otoc_states.csv".into(),
            states.expect("at least one lambda"),
        ),
    ])
}

fn states_table(
    config: &ExperimentConfig,
    params: &SimParams,
    series: &OtocSeries,
) -> Result<ResultTable> {
    let mut t = new_table(
        config.kind,
        params,
        &[("theta", Float), ("psi_r", Float), ("phi_r", Float)],
    )?;
    t.set_meta("t_n", config.t_max.to_string())?;
    let psi = theta_density(&series.psi_r);
    let phi = theta_density(&series.phi_r);
    for (j, &theta) in series.psi_r.grid().theta_values().iter().enumerate() {
        t.push(vec![theta.into(), psi[j].into(), phi[j].into()])?;
    }
    Ok(t)
}

fn scan_tables(config: &ExperimentConfig) -> Result<Vec<(String, ResultTable)>> {
    let scan = scan_staircase(
        &config.k_values,
        config.params,
        config.t_max,
        config.window,
        config.jobs,
    )?;
    let mut cols = vec![
        ("index", Int),
        ("plateau", Int),
        ("G_predicted", Float),
        ("D_predicted", Float),
    ];
    cols.extend(FIT_COLUMNS);
    let mut staircase = new_table(config.kind, &config.params, &cols)?;
    set_window_meta(&mut staircase, config)?;
    staircase.set_meta_f64("reference_nu", crate::otoc::REFERENCE_NU)?;
    let mut outputs = Vec::with_capacity(scan.entries.len() + 1);
    for (i, entry) in scan.entries.iter().enumerate() {
        let params = SimParams {
            k: entry.k,
            ..config.params
        };
        let mut per_k = new_table(config.kind, &params, &OTOC_COLUMNS)?;
        set_window_meta(&mut per_k, config)?;
        push_otoc(&mut per_k, &entry.series, &[])?;
        outputs.push((format!("scan_k/k_{i:02}.csv"), per_k));

        let mut row = vec![
            i.into(),
            plateau_index(entry.k).unwrap_or(0).into(),
            entry.predicted_g.unwrap_or(f64::NAN).into(),
            predicted_d(entry.k).unwrap_or(f64::NAN).into(),
        ];
        row.extend(fit_row(&entry.fit, config.params.lambda));
        staircase.push(row)?;
    }
    outputs.push(("staircase.csv".into(), staircase));
    Ok(outputs)
}

fn classical_table(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table(
        config.kind,
        &config.params,
        &[
            ("K", Float),
            ("n", Int),
            ("theta", Float),
            ("p", Float),
            ("D_predicted", Float),
        ],
    )?;
    let start = SolitonState::at_plateau(0, 0.0);
    for &k in &config.k_values {
        let d = predicted_d(k).unwrap_or(f64::NAN);
        for (n, s) in soliton_trajectory(start, k, config.params.n_kicks)?
            .iter()
            .enumerate()
        {
            table.push(vec![
                k.into(),
                n.into(),
                s.theta.into(),
                s.p.into(),
                d.into(),
            ])?;
        }
    }
    Ok(table)
}

fn oracle_table(config: &ExperimentConfig) -> Result<(ResultTable, usize)> {
    let mut checks = Vec::new();
    for &n in &config.oracle_points {
        let params = SimParams {
            n_points: n,
            ..config.params
        };
        checks.extend(dense::oracle_checks(&params, config.t_max, n as u64)?);
    }
    let failures = checks.iter().filter(|c| !c.passed()).count();
    let mut table = dense::report_table(&checks)?;
    for (k, v) in new_table(config.kind, &config.params, &[])?.metadata() {
        table.set_meta(k, v.clone())?;
    }
    Ok((table, failures))
}

/// Read a table written by [`run`].
pub fn read_table(path: &Path) -> Result<ResultTable> {
    ResultTable::read(path)
}
