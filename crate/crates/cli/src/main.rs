//! `nldiff`: config-driven experiment runner for the nonlocal diffusion
//! decay laboratory.
//!
//! Subcommands: `series`, `kernel`, `solve`, `suite`, `check`. Runs write
//! CSV tables, optional SVG plots and a `manifest.json` with the config
//! hash and per-file digests; identical configs and seeds produce
//! byte-identical CSV outputs.

mod commands;
mod config;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{cmd_check, cmd_kernel, cmd_series, cmd_solve, cmd_suite, EXIT_CONFIG};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "nldiff", version, about = "Decay experiments for nonlocal diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the series/R(alpha t) ratio stays bounded over a time grid
    Series(RunArgs),
    /// Sweep convolution-power norms against the sharp Young bound
    Kernel(RunArgs),
    /// Run one decay scenario end to end and fit the rate
    Solve(RunArgs),
    /// Run the full theorem-scenario battery
    Suite(SuiteArgs),
    /// Verify file digests recorded in an output manifest
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker cap for scenario-level parallelism
    #[arg(long)]
    workers: Option<usize>,
    /// Seed override for randomized meshes
    #[arg(long)]
    seed: Option<u64>,
    /// Emit SVG plots
    #[arg(long)]
    plot: bool,
    /// Re-verify recorded digests after the run
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SuiteArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker cap for scenario-level parallelism
    #[arg(long)]
    workers: Option<usize>,
    /// Seed recorded in the manifest
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Emit SVG plots
    #[arg(long)]
    plot: bool,
    /// Re-verify recorded digests after the run
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Output directory holding a manifest.json
    #[arg(long)]
    out: PathBuf,
}

fn load_config(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf), i32> {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", args.config.display());
            return Err(EXIT_CONFIG);
        }
    };
    let mut config = match ExperimentConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return Err(EXIT_CONFIG);
        }
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((config, out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Series(args) => match load_config(args) {
            Ok((config, out)) => cmd_series(&config, &out, args.check),
            Err(code) => code,
        },
        Command::Kernel(args) => match load_config(args) {
            Ok((config, out)) => cmd_kernel(&config, &out, args.check),
            Err(code) => code,
        },
        Command::Solve(args) => match load_config(args) {
            Ok((config, out)) => cmd_solve(&config, &out, args.plot, args.check),
            Err(code) => code,
        },
        Command::Suite(args) => cmd_suite(&args.out, args.workers, args.seed, args.plot, args.check),
        Command::Check(args) => cmd_check(&args.out),
    };
    ExitCode::from(code as u8)
}
