//! `sectio`: section measures, positive-definiteness tests and
//! counterexample construction from JSON configs.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure, 4 refusal
//! because a precondition does not hold.

mod commands;
mod config;
mod exit;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use commands::Route;
use config::ExperimentConfig;
use exit::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "sectio", version, about = "Weighted section measures of star bodies")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Section route for `sections`.
    #[arg(long, global = true, value_enum, default_value = "direct")]
    route: Route,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid resolution; overrides the config.
    #[arg(long, global = true)]
    resolution: Option<usize>,

    /// Spherical-harmonic degree; overrides the config.
    #[arg(long, global = true)]
    max_degree: Option<usize>,

    /// Run the built-in oracle suite and print a pass/fail table.
    #[arg(long)]
    selftest: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Measure of each body under each density (CSV).
    Volume,
    /// Section profile by the direct or Fourier route (CSV).
    Sections,
    /// Positive-definiteness verdict for the kernel of a body (JSON).
    Pdtest,
    /// Build a convex body violating the Busemann-Petty implication (JSON + CSV).
    Counterexample,
    /// Recover a body from a section profile CSV (CSV).
    Reconstruct,
    /// Section integral lower bound and l_p volume ratios (JSON).
    Bounds,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("SECTIO_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| ConfigError(format!("SECTIO_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot configure the worker pool")
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| ConfigError("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.resolution.is_some() {
        cfg.resolution = cli.resolution;
    }
    if cli.max_degree.is_some() {
        cfg.max_degree = cli.max_degree;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    configure_threads()?;
    if cli.selftest {
        return Ok(if selftest::run() { exit::SUCCESS } else { exit::NUMERICAL });
    }
    let Some(command) = &cli.command else {
        return Err(ConfigError("a subcommand or --selftest is required".into()).into());
    };
    let cfg = load(cli)?;
    let out = cfg.out.as_deref();
    match command {
        Command::Volume => commands::volume(&cfg, out),
        Command::Sections => commands::sections(&cfg, cli.route, out),
        Command::Pdtest => commands::pdtest(&cfg, out),
        Command::Counterexample => commands::counterexample(&cfg, out),
        Command::Reconstruct => commands::reconstruct(&cfg, out),
        Command::Bounds => commands::bounds(&cfg, out),
    }?;
    Ok(exit::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit::code(&e)
        }
    };
    ExitCode::from(code as u8)
}
