//! `granular` command-line front end: synthetic data generation, SONFIS and
//! SORST experiment runs, and plot-data emission.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::Value;

use config::{ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(name = "granular", version, about = "Granular-computing experiments: SOM reduction with neuro-fuzzy or rough-set rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config field by dotted path, e.g. `meta.max_rules=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Override the seed (`data.synthetic.seed` for generate, `meta.seed` for run).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic hydrocyclone data set as CSV.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output CSV file (default: `<output_dir>/data.csv`).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run SONFIS or SORST and write its artifacts.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Run directory (default: the config's `output_dir`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Turn a run directory into plot-ready CSV files.
    Report {
        /// Run directory written by `run`.
        run_dir: PathBuf,
        /// Where to write the report (default: `<run_dir>/report`).
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn load(args: &ConfigArgs, seed_key: &str) -> Result<RawConfig> {
    let mut raw = RawConfig::load(args.config.as_deref())?;
    raw.apply_overrides(&args.overrides)?;
    if let Some(seed) = args.seed {
        raw.set(seed_key, Value::from(seed))?;
    }
    Ok(raw)
}

fn output_dir(out: Option<PathBuf>, configured: Option<PathBuf>) -> Result<PathBuf> {
    out.or(configured)
        .context("no output location: pass --out or set `output_dir` in the config")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate { config, out } => {
            let raw = load(&config, "data.synthetic.seed")?;
            let data = raw.value.get("data").cloned().context("config has no `data` section")?;
            let data = serde_json::from_value(data).context("invalid `data` section")?;
            let out = match out {
                Some(file) => file,
                None => {
                    let dir = raw.value.get("output_dir").and_then(Value::as_str).map(PathBuf::from);
                    raw.resolve(&output_dir(None, dir)?).join("data.csv")
                }
            };
            run::generate(&data, &out)
        }
        Command::Run { config, out } => {
            let raw = load(&config, "meta.seed")?;
            let experiment = ExperimentConfig::from_raw(&raw)?;
            let dir = output_dir(out, experiment.output_dir.clone())?;
            run::run(&experiment, &dir).map(|_| ())
        }
        Command::Report { run_dir, out } => {
            let out = out.unwrap_or_else(|| run_dir.join("report"));
            let written = report::report(&run_dir, &out)?;
            info!("wrote {} to {}", written.join(", "), out.display());
            Ok(())
        }
    }
}
