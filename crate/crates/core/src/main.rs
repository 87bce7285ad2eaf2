use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ptkr::harness::{self, ExperimentConfig, ExperimentKind};
use ptkr::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ptkr",
    version,
    about = "PT-symmetric kicked rotor experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward evolution of the Gaussian seed.
    Evolve(Common),
    /// Forward evolution, p insertion and backward evolution.
    ReverseCheck(Common),
    /// OTOC history and growth-rate fit, optionally for several lambdas.
    Otoc(Common),
    /// OTOC growth rate across K values.
    ScanK(Common),
    /// Classical soliton map.
    Classical(Common),
    /// Split-step pipeline against dense matrices.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (key = value lines, optional [kind] sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set K=2pi`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for scans.
    #[arg(long)]
    jobs: Option<usize>,
}

fn build(kind: ExperimentKind, common: Common) -> Result<ExperimentConfig> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
        None => String::new(),
    };
    let mut overrides = common.set;
    if let Some(out) = common.out {
        overrides.push(format!("out={}", out.display()));
    }
    if let Some(jobs) = common.jobs {
        overrides.push(format!("jobs={jobs}"));
    }
    ExperimentConfig::parse(kind, &text, &overrides)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Evolve(c) => (ExperimentKind::Evolve, c),
        Command::ReverseCheck(c) => (ExperimentKind::ReverseCheck, c),
        Command::Otoc(c) => (ExperimentKind::Otoc, c),
        Command::ScanK(c) => (ExperimentKind::ScanK, c),
        Command::Classical(c) => (ExperimentKind::Classical, c),
        Command::OracleCheck(c) => (ExperimentKind::OracleCheck, c),
    };
    match build(kind, common).and_then(|cfg| harness::run(&cfg)) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
