//! `clusterflow` — simulator CLI for the point-merging dynamics and its
//! time-reversed weight process.
//!
//! Exit codes: 0 success, 1 failed verification assertion, 2 bad
//! configuration, 3 runtime failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;
use config::ExperimentConfig;
use output::OutDir;

#[derive(Parser)]
#[command(
    name = "clusterflow",
    about = "simulate merging point dynamics and the dual weight process",
    version
)]
struct Cli {
    /// TOML experiment configuration (defaults apply when omitted)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed from the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory from the config
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); falls back to CLUSTERFLOW_THREADS,
    /// then the config value
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run forward replicas and emit gap/point tables and CDF figures
    Forward,
    /// Emit the genealogy of a small unrescaled run
    Tree,
    /// Run the integer weight process and emit its exact mass ledger
    Reverse,
    /// Compare forward and reverse estimates of the pairing functional
    Duality,
    /// Run the verification suite and write a verdict file
    Verify {
        /// Only run checks whose name contains this substring
        #[arg(long)]
        filter: Option<String>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            config::parse_config(&text).map_err(CliError::Config)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.display().to_string();
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    } else if let Ok(v) = std::env::var("CLUSTERFLOW_THREADS") {
        cfg.threads = v
            .parse()
            .map_err(|_| CliError::Config(format!("CLUSTERFLOW_THREADS is not a number: {v}")))?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    if cfg.threads > 0 {
        // a second invocation in-process keeps the existing pool; fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    let out = OutDir::create(std::path::Path::new(&cfg.out))?;
    let resolved = toml::to_string_pretty(&cfg)
        .map_err(|e| CliError::Runtime(format!("cannot serialize resolved config: {e}")))?;
    out.write("config.resolved.toml", &resolved)?;

    match &cli.command {
        Command::Forward => commands::cmd_forward(&cfg, &out),
        Command::Tree => commands::cmd_tree(&cfg, &out),
        Command::Reverse => commands::cmd_reverse(&cfg, &out),
        Command::Duality => commands::cmd_duality(&cfg, &out),
        Command::Verify { filter } => commands::cmd_verify(&cfg, &out, filter.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::GateFailed(n)) => {
            eprintln!("error: {n} verification assertion(s) failed");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
