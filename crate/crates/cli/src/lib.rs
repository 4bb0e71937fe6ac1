//! Batch experiment runner: reads a `key = value` config, runs one command
//! over its refinement levels and writes CSV tables plus `summary.json`.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use holdervar::config::{parse_list, Config};

pub mod commands;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] holdervar::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Norms,
    KernelCheck,
    Potential,
    Solve,
    Schauder,
    MollifyCheck,
    InterpCheck,
    Example,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norms => "norms",
            Command::KernelCheck => "kernel-check",
            Command::Potential => "potential",
            Command::Solve => "solve",
            Command::Schauder => "schauder",
            Command::MollifyCheck => "mollify-check",
            Command::InterpCheck => "interp-check",
            Command::Example => "example",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "holdervar", version, about = "Variable-exponent Hölder experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// `key = value` experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the CSV tables and `summary.json`.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refinement levels, overriding the config's `levels`.
    #[arg(long)]
    pub levels: Option<String>,
}

/// Runs one invocation and returns the keys the config set but no command read.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let mut cfg = Config::load(&cli.config)?;
    let levels = match &cli.levels {
        Some(l) => {
            let l: Vec<usize> = parse_list(l).map_err(|d| CliError::Usage(format!("--levels: {d}")))?;
            holdervar::config::check_levels(&l)?;
            cfg.set("levels", &l.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
            Some(l)
        }
        None => None,
    };
    let echo = cfg.entries();
    let ctx = commands::Ctx { cfg, levels, seed: cli.seed };
    let out = commands::run(cli.command.name(), &ctx)?;
    report::emit(&out, &cli.out, cli.command.name(), cli.seed, &echo)?;
    Ok(ctx.cfg.unused())
}
