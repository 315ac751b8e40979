//! The `rnm` experiment runner.
//!
//! `rnm <subcommand> --config <path> [--out <dir>] [--seed <u64>]` reads a
//! JSON [`config::ExperimentConfig`], runs it and writes CSV, JSON, JSONL
//! and gnuplot files plus `manifest.json` into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure. Errors
//! are reported as one JSON object on stderr.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{parse_config, ExperimentKind};
use output::{write_outputs, ManifestInfo};

#[derive(Debug, Parser)]
#[command(name = "rnm", version, about = "Random normal matrix experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium droplet and obstacle profile.
    Droplet(RunArgs),
    /// Trace identity of the reproducing kernel.
    KernelCheck(RunArgs),
    /// Draw configurations (DPP or MCMC) as JSONL.
    Sample(RunArgs),
    /// Mean corrections ν_n(f) against the limit ν(f).
    Fluctuations(RunArgs),
    /// Ward identity residuals.
    Ward(RunArgs),
    /// Central limit test of linear statistics.
    Clt(RunArgs),
    /// Cauchy transform D_n of the fluctuation measure.
    DnField(RunArgs),
    /// Run the experiment named in the config's `experiment` key.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Numerical(rnm::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn report(&self) -> serde_json::Value {
        match self {
            CliError::Schema(msg) => json!({"status": "error", "kind": "schema", "code": "E_SCHEMA", "message": msg}),
            CliError::Numerical(e) => json!({"status": "error", "kind": "numerical", "code": e.code(), "message": e.to_string()}),
        }
    }
}

impl From<rnm::Error> for CliError {
    fn from(e: rnm::Error) -> Self {
        CliError::Numerical(e)
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("RNM_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Some(k)),
            _ => Err(CliError::Schema(format!("RNM_THREADS must be a positive integer (got '{s}')"))),
        },
    }
}

/// Runs one command; returns the output directory on success.
pub fn execute(command: &Command) -> Result<PathBuf, CliError> {
    let (kind, args) = match command {
        Command::Droplet(a) => (Some(ExperimentKind::Droplet), a),
        Command::KernelCheck(a) => (Some(ExperimentKind::KernelCheck), a),
        Command::Sample(a) => (Some(ExperimentKind::Sample), a),
        Command::Fluctuations(a) => (Some(ExperimentKind::Fluctuations), a),
        Command::Ward(a) => (Some(ExperimentKind::Ward), a),
        Command::Clt(a) => (Some(ExperimentKind::Clt), a),
        Command::DnField(a) => (Some(ExperimentKind::DnField), a),
        Command::Run(a) => (None, a),
    };
    let started = chrono::Utc::now().to_rfc3339();
    let bytes = std::fs::read(&args.config)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", args.config.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Schema("config is not UTF-8".into()))?;
    let mut exp = parse_config(&text, kind).map_err(CliError::Schema)?;
    if let Some(out) = &args.out {
        exp.output = out.clone();
    }
    if let Some(seed) = args.seed {
        exp.seed = seed;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads_from_env()? {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Numerical(rnm::Error::Parameter(e.to_string())))?;
    let outputs = pool.install(|| experiments::run_experiment(&exp))?;
    if !outputs.is_empty() {
        let info = ManifestInfo { experiment: exp.kind.name(), config_bytes: &bytes, seed: exp.seed, started };
        write_outputs(&outputs, &exp.output, &info).map_err(|e| CliError::Numerical(e.into()))?;
    }
    Ok(exp.output)
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match execute(&cli.command) {
        Ok(dir) => {
            println!("{}", json!({"status": "ok", "output": dir.display().to_string()}));
            0
        }
        Err(e) => {
            eprintln!("{}", e.report());
            e.exit_code()
        }
    }
}
