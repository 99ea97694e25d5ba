use std::path::PathBuf;

use clap::Args;
use opmap_core::maps::{test_positive, Notion, TesterConfig, Verdict};
use opmap_core::random::Population;

use super::{load_map, write_report};
use crate::output::SummaryRow;
use crate::{InputError, Outcome, RunConfig};

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Map spec JSON.
    pub spec: PathBuf,
    /// `type1`, `type2` (with --n), or a full notion such as `type2(3)`,
    /// `choi_exact`, `choi_inequality`, `superadditive`, `monotone`.
    #[arg(long)]
    pub notion: String,
    /// Amplification order for `type1`/`type2`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Sampling ensemble; the map's preferred one when absent.
    #[arg(long, value_parser = parse_population)]
    pub population: Option<Population>,
    /// Skip the Choi certificate for linear maps.
    #[arg(long)]
    pub no_exact: bool,
}

fn parse_population(s: &str) -> Result<Population, String> {
    match s {
        "real" => Ok(Population::Real),
        "complex" => Ok(Population::Complex),
        _ => Err(format!("unknown population '{s}' (real, complex)")),
    }
}

pub fn parse_notion(notion: &str, n: Option<usize>) -> Result<Notion, InputError> {
    let full = match (notion, n) {
        ("type1" | "type2", Some(n)) => format!("{notion}({n})"),
        ("type1" | "type2", None) => return Err(InputError(format!("{notion} needs --n"))),
        (_, Some(_)) => return Err(InputError(format!("--n does not apply to '{notion}'"))),
        (_, None) => notion.to_string(),
    };
    Ok(full.parse()?)
}

pub fn run(args: &CheckArgs, cfg: &RunConfig) -> Result<Outcome, InputError> {
    let notion = parse_notion(&args.notion, args.n)?;
    let (_, map) = load_map(&args.spec)?;
    let tester = TesterConfig {
        trials: cfg.trials(),
        seed: cfg.seed,
        tol: cfg.tolerances()?,
        population: args.population,
        exact_upgrade: !args.no_exact,
        ..TesterConfig::default()
    };
    let report = test_positive(&map, notion, &tester)?;
    let row = SummaryRow::new(
        format!("{}:{}", report.check, report.notion),
        report.verdict,
        report.min_eig,
        report.seed,
        report.trials,
    );
    write_report(&report, &[row], cfg)?;
    Ok(Outcome::from_violation(report.verdict == Verdict::Violated))
}
