//! `opmap`: positivity checks, tracial decompositions, uncertainty margins
//! and the example gallery from the command line.
//!
//! Exit status: 0 when every check passes, 1 when a violation (or an
//! uncertified decomposition) is found, 2 for usage and input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use opmap_core::algebra::ToleranceConfig;

use output::Format;

/// Usage or input problem; reported on stderr with exit status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::error::Error> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    pub fn from_violation(violated: bool) -> Self {
        if violated {
            Outcome::Violation
        } else {
            Outcome::Pass
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn parse_positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Base seed; accepts decimal or 0x-prefixed hex.
    #[arg(long, global = true, default_value = "0xC5A1", value_parser = parse_seed)]
    pub seed: u64,
    /// Random trials per check (default 1000; gallery cases keep their own
    /// defaults unless this is given).
    #[arg(long, global = true, value_parser = parse_positive)]
    pub trials: Option<u64>,
    /// PSD tolerance.
    #[arg(long, global = true, env = "OPMAP_DEFAULT_TOL")]
    pub tol: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

pub const DEFAULT_TRIALS: u64 = 1000;

impl RunConfig {
    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn tolerances(&self) -> Result<ToleranceConfig, InputError> {
        let d = ToleranceConfig::default();
        match self.tol {
            None => Ok(d),
            Some(t) => Ok(ToleranceConfig::new(t, d.eq_tol, d.herm_tol)?),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "opmap", version, about = "Positivity and uncertainty checks for maps between matrix algebras")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test one positivity notion on a map spec.
    Check(commands::check::CheckArgs),
    /// Factor a tracial map through the center.
    Decompose(commands::decompose::DecomposeArgs),
    /// Evaluate uncertainty inequalities on a bundle of map and observables.
    Uncertainty(commands::uncertainty::UncertaintyArgs),
    /// Named examples with expected verdicts.
    Gallery(commands::gallery::GalleryArgs),
    /// Resumable round-robin search for positivity violations.
    Fuzz(commands::fuzz::FuzzArgs),
}

fn run(cli: Cli) -> Result<Outcome, InputError> {
    if let Some(n) = cli.config.threads {
        if n == 0 {
            return Err(InputError("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let cfg = &cli.config;
    match &cli.command {
        Command::Check(a) => commands::check::run(a, cfg),
        Command::Decompose(a) => commands::decompose::run(a, cfg),
        Command::Uncertainty(a) => commands::uncertainty::run(a, cfg),
        Command::Gallery(a) => commands::gallery::run(a, cfg),
        Command::Fuzz(a) => commands::fuzz::run(a, cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
