//! `prethermal`: Laplace inversion, spin simulation, Floquet rate scans and synthetic data.
//!
//! Exit codes: 0 success, 2 bad input (arguments, config, unreadable or unparsable files),
//! 3 solver or analysis failure, 4 simulation budget exceeded.

mod cmd;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prethermal::Error;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn parse(m: impl Into<String>) -> Self {
        CliError { code: 2, message: m.into() }
    }
    pub fn io(m: impl Into<String>) -> Self {
        CliError { code: 2, message: m.into() }
    }
    pub fn solver(m: impl Into<String>) -> Self {
        CliError { code: 3, message: m.into() }
    }
    pub fn annotate(self, label: impl std::fmt::Display) -> Self {
        CliError { code: self.code, message: format!("{label}: {}", self.message) }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::BudgetExceeded { .. } => 4,
            Error::NoConvergence { .. }
            | Error::NoRotation
            | Error::NoCrossing
            | Error::TailEnergy(_)
            | Error::Reconstruction(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "prethermal", version, about = "Decay-spectrum inversion and driven dipolar spin tools")]
pub struct Cli {
    /// JSON file with the subcommand's options; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Also write SVG plots next to the CSV outputs
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invert one decay trace into a T2 spectrum
    Invert(cmd::invert::Args),
    /// Invert a set of labelled traces into a lifetime map
    Map(cmd::map::Args),
    /// Propagate dipolar clusters under a pulse train, optionally sweeping one parameter
    Simulate(cmd::simulate::Args),
    /// Effective axis, mode weights and R1', R2' over resonance offsets
    Rates(cmd::rates::Args),
    /// Imprint an AC field on a carrier and evaluate windowed signal and SNR
    Sense(cmd::sense::Args),
    /// Synthesize a multi-exponential decay trace
    Synth(cmd::synth::Args),
}

/// Global options passed to every command.
pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub svg: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::parse("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().map_err(|e| CliError::parse(e.to_string()))?;
    }
    let g = Globals { config: cli.config, seed: cli.seed, svg: cli.svg };
    if let Some(p) = &g.config {
        if !p.is_file() {
            return Err(CliError::parse(format!("config file {} not found", p.display())));
        }
    }
    match cli.command {
        Command::Invert(a) => cmd::invert::run(&a, &g),
        Command::Map(a) => cmd::map::run(&a, &g),
        Command::Simulate(a) => cmd::simulate::run(&a, &g),
        Command::Rates(a) => cmd::rates::run(&a, &g),
        Command::Sense(a) => cmd::sense::run(&a, &g),
        Command::Synth(a) => cmd::synth::run(&a, &g),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
