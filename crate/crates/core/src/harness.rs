//! File-writing commands behind the command-line tool. Every command writes
//! into its own output directory, together with `config.toml`, an echo of
//! the configuration sufficient to re-run it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{RowBoundReport, SweepPoint};
use crate::error::{domain, Result};
use crate::experiment::{bound_reports, extrapolate, simulate, sweep, ExperimentConfig, Extrapolation};
use crate::observables::{format_float, SnapshotSeries};
use crate::pauli::HamiltonianDoc;
use crate::verify::{run_suite, VerifyReport, VerifySettings};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    n_qubits: usize,
    snapshots: usize,
    hamiltonian: HamiltonianDoc,
}

fn prepare_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn write_json(path: PathBuf, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn write_config_echo(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    fs::write(out.join("config.toml"), cfg.to_toml_string())?;
    Ok(())
}

fn write_provenance(cfg: &ExperimentConfig, command: &str, series: &SnapshotSeries, out: &Path) -> Result<()> {
    write_json(
        out.join("provenance.json"),
        &Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.seed,
            config: cfg,
            n_qubits: cfg.n_qubits(),
            snapshots: series.n_snapshots(),
            hamiltonian: cfg.hamiltonian()?.to_json(),
        },
    )
}

/// Loads `trajectory`, or simulates when no file is given.
pub fn load_or_simulate(cfg: &ExperimentConfig, trajectory: Option<&Path>) -> Result<SnapshotSeries> {
    let series = match trajectory {
        Some(path) => SnapshotSeries::load_csv(path)?,
        None => simulate(cfg)?.series,
    };
    if (series.dt() - cfg.simulation.dt).abs() > 1e-9 * cfg.simulation.dt {
        return domain(format!(
            "trajectory step {} differs from simulation.dt {}",
            series.dt(),
            cfg.simulation.dt
        ));
    }
    Ok(series)
}

/// Runs the quench and writes `trajectory.csv`, `provenance.json` and the
/// config echo.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SnapshotSeries> {
    let traj = simulate(cfg)?;
    prepare_dir(out)?;
    traj.series.save_csv(out.join(TRAJECTORY_FILE))?;
    write_provenance(cfg, "simulate", &traj.series, out)?;
    write_config_echo(cfg, out)?;
    Ok(traj.series)
}

/// Fits on the configured window and writes `prediction.csv`, `error.csv`,
/// `model.json`, `envelope.json` and a gnuplot script for the error curve.
pub fn cmd_extrapolate(cfg: &ExperimentConfig, trajectory: Option<&Path>, out: &Path) -> Result<Extrapolation> {
    let truth = load_or_simulate(cfg, trajectory)?;
    let ex = extrapolate(cfg, &truth)?;
    prepare_dir(out)?;
    ex.prediction.save_csv(out.join("prediction.csv"))?;
    fs::write(out.join("error.csv"), ex.curve.to_csv_string()?)?;
    write_json(out.join("model.json"), &ex.model.to_doc())?;
    write_json(out.join("envelope.json"), &ex.envelope)?;
    fs::write(out.join("error.gp"), error_plot_script(cfg))?;
    write_provenance(cfg, "extrapolate", &truth, out)?;
    write_config_echo(cfg, out)?;
    Ok(ex)
}

/// Writes `sweep.csv` with one `m,error_at_T` row per window.
pub fn cmd_sweep_m(
    cfg: &ExperimentConfig,
    trajectory: Option<&Path>,
    m_values: &[usize],
    out: &Path,
) -> Result<Vec<SweepPoint>> {
    if m_values.is_empty() {
        return domain("sweep needs at least one m");
    }
    let truth = load_or_simulate(cfg, trajectory)?;
    let points = sweep(cfg, &truth, m_values)?;
    prepare_dir(out)?;
    fs::write(out.join("sweep.csv"), sweep_csv(&points))?;
    fs::write(out.join("sweep.gp"), sweep_plot_script(cfg))?;
    write_provenance(cfg, "sweep-m", &truth, out)?;
    write_config_echo(cfg, out)?;
    Ok(points)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("m,error_at_T\n");
    for p in points {
        let e = p.error_at_end.map(format_float).unwrap_or_else(|| "nan".into());
        s.push_str(&format!("{},{e}\n", p.m));
    }
    s
}

/// Writes `bound.json` with the global bound against the empirical error
/// for each target row.
pub fn cmd_bound_report(
    cfg: &ExperimentConfig,
    trajectory: Option<&Path>,
    out: &Path,
) -> Result<Vec<RowBoundReport>> {
    let truth = load_or_simulate(cfg, trajectory)?;
    let ex = extrapolate(cfg, &truth)?;
    let reports = bound_reports(cfg, &truth, &ex)?;
    prepare_dir(out)?;
    write_json(out.join("bound.json"), &reports)?;
    write_provenance(cfg, "bound-report", &truth, out)?;
    write_config_echo(cfg, out)?;
    Ok(reports)
}

/// Runs the property suite and writes `verify.json`.
pub fn cmd_verify(settings: &VerifySettings, out: &Path) -> Result<VerifyReport> {
    let report = run_suite(settings)?;
    prepare_dir(out)?;
    write_json(out.join("verify.json"), &report)?;
    Ok(report)
}

fn error_plot_script(cfg: &ExperimentConfig) -> String {
    format!(
        "set datafile separator ','\nset logscale y\nset xlabel 't'\nset ylabel '|error|'\n\
         set arrow from {t},graph 0 to {t},graph 1 nohead dt 2\n\
         plot 'error.csv' using 1:2 skip 1 with lines title '{name}'\n",
        t = format_float(cfg.t_min()),
        name = cfg.name
    )
}

fn sweep_plot_script(cfg: &ExperimentConfig) -> String {
    format!(
        "set datafile separator ','\nset logscale y\nset xlabel 'm'\nset ylabel '|error(T)|'\n\
         plot 'sweep.csv' using 1:2 skip 1 with linespoints title '{}'\n",
        cfg.name
    )
}
