//! `udisc <command> --config <path> [--out <dir>] [--seed <u64>] [--threads <n>]`
//!
//! Exit codes: 0 on success, 1 when the experiment fails, 2 for configuration
//! errors. Failures print one JSON record on stderr and write no files.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use commands::{Command, Run};
use error::Failure;

#[derive(Debug, Parser)]
#[command(name = "udisc", version, about = "Universal discretization experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::config)?;
    }
    let bytes = std::fs::read(&cli.config).map_err(|e| Failure::config(format!("{}: {e}", cli.config.display())))?;
    let base_dir = cli.config.parent().unwrap_or(Path::new("."));
    let artifacts = Run {
        command: cli.command,
        config: &bytes,
        base_dir,
        seed: cli.seed,
    }
    .execute()?;
    output::write_all(&cli.out, &artifacts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.record());
            ExitCode::from(failure.exit_code())
        }
    }
}
