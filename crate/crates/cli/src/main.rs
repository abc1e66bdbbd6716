use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quench_dmd::experiment::ExperimentConfig;
use quench_dmd::harness;
use quench_dmd::verify::{Mutation, VerifySettings};

const EXIT_VALIDATION: u8 = 1;
const EXIT_PROPERTY: u8 = 2;

/// Trotterized quench simulation with DMD extrapolation of the observables.
#[derive(Parser, Debug)]
#[command(name = "quench-dmd", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for fits and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the quench and write trajectory.csv.
    Simulate,
    /// Fit on the first m snapshots and predict the full horizon.
    Extrapolate {
        /// Recorded trajectory; simulated when omitted.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Error at the final time against the fitting window m.
    SweepM {
        #[arg(long)]
        trajectory: Option<PathBuf>,
        /// Comma-separated windows; defaults to `sweep.m` of the config.
        #[arg(long, value_delimiter = ',')]
        m: Vec<usize>,
    },
    /// Global error bound against the empirical error.
    BoundReport {
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Run the property suite.
    Verify {
        /// Inject a known defect: `none` or `jw-sign`.
        #[arg(long, default_value = "none")]
        mutation: Mutation,
    },
}

fn load_config(cli: &Cli) -> quench_dmd::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| quench_dmd::Error::Domain("--config is required for this command".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> quench_dmd::Result<u8> {
    let out: &Path = &cli.out;
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(cli)?;
            let series = harness::cmd_simulate(&cfg, out)?;
            println!(
                "simulated {} rows x {} snapshots -> {}",
                series.n_rows(),
                series.n_snapshots(),
                out.join(harness::TRAJECTORY_FILE).display()
            );
        }
        Command::Extrapolate { trajectory } => {
            let cfg = load_config(cli)?;
            let ex = harness::cmd_extrapolate(&cfg, trajectory.as_deref(), out)?;
            let env = &ex.envelope;
            println!("error at T: {:e}", ex.final_error());
            println!(
                "envelope C={:e} tail slope={} over t>={}: {}",
                env.c,
                env.tail_slope.map_or("n/a".into(), |s| format!("{s:.3}")),
                env.t_min,
                if env.pass { "pass" } else { "fail" }
            );
        }
        Command::SweepM { trajectory, m } => {
            let cfg = load_config(cli)?;
            let m_values = if m.is_empty() {
                cfg.sweep
                    .as_ref()
                    .map(|s| s.m.clone())
                    .ok_or_else(|| quench_dmd::Error::Domain("no --m given and the config has no [sweep]".into()))?
            } else {
                m.clone()
            };
            for p in harness::cmd_sweep_m(&cfg, trajectory.as_deref(), &m_values, out)? {
                match (p.error_at_end, p.note) {
                    (Some(e), _) => println!("m={} error_at_T={e:e}", p.m),
                    (None, note) => println!("m={} skipped: {}", p.m, note.unwrap_or_default()),
                }
            }
        }
        Command::BoundReport { trajectory } => {
            let cfg = load_config(cli)?;
            for r in harness::cmd_bound_report(&cfg, trajectory.as_deref(), out)? {
                println!(
                    "{}: bound {} the error at every post-window step (c_m={:e}, cond={:e})",
                    r.label,
                    if r.dominated { "dominates" } else { "does not dominate" },
                    r.inputs.c_m,
                    r.inputs.phi_cond
                );
            }
        }
        Command::Verify { mutation } => {
            let settings = VerifySettings {
                seed: cli.seed.unwrap_or(0),
                mutation: *mutation,
                ..VerifySettings::default()
            };
            let report = harness::cmd_verify(&settings, out)?;
            for p in &report.properties {
                println!(
                    "{} {} (metric {:e}, tolerance {:e})",
                    if p.pass { "PASS" } else { "FAIL" },
                    p.name,
                    p.metric,
                    p.tolerance
                );
            }
            if !report.pass {
                return Ok(EXIT_PROPERTY);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}
