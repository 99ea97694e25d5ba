use clap::{Args, Subcommand};
use opmap_core::gallery::{list_cases, reproduce_all, run_case, CaseParams};
use serde::Serialize;

use super::write_report;
use crate::output::{csv_string, emit, json_string, Format, SummaryRow};
use crate::{InputError, Outcome, RunConfig};

#[derive(Args, Debug)]
pub struct GalleryArgs {
    #[command(subcommand)]
    pub command: GalleryCommand,
}

#[derive(Subcommand, Debug)]
pub enum GalleryCommand {
    /// Print the case catalog.
    List,
    /// Run one case.
    Run {
        id: String,
        /// Case parameter as key=value; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, String)>,
    },
    /// Run every case with default parameters.
    All,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Serialize)]
struct CatalogRow {
    id: String,
    description: String,
}

pub fn run(args: &GalleryArgs, cfg: &RunConfig) -> Result<Outcome, InputError> {
    match &args.command {
        GalleryCommand::List => {
            let cases = list_cases();
            let text = match cfg.format {
                Format::Json => json_string(&cases)?,
                Format::Csv => csv_string(
                    &cases
                        .iter()
                        .map(|c| CatalogRow { id: c.id.into(), description: c.description.into() })
                        .collect::<Vec<_>>(),
                )?,
            };
            emit(&text, cfg.out.as_deref())?;
            Ok(Outcome::Pass)
        }
        GalleryCommand::Run { id, params } => {
            let mut p: CaseParams = params.iter().cloned().collect();
            if let Some(t) = cfg.trials {
                let takes_trials = list_cases().iter().any(|c| c.id == id && c.parameters.iter().any(|(k, _)| *k == "trials"));
                if takes_trials {
                    p.entry("trials".into()).or_insert_with(|| t.to_string());
                }
            }
            let result = run_case(id, &p, cfg.seed)?;
            let rows: Vec<SummaryRow> = result
                .checks
                .iter()
                .map(|c| {
                    SummaryRow::new(
                        format!("{}:{}", result.id, c.label),
                        c.report.verdict,
                        c.report.min_eig,
                        result.seed,
                        c.report.trials,
                    )
                })
                .collect();
            write_report(&result, &rows, cfg)?;
            Ok(Outcome::from_violation(!result.passed))
        }
        GalleryCommand::All => {
            let summary = reproduce_all(cfg.seed)?;
            let rows: Vec<SummaryRow> = summary
                .rows
                .iter()
                .map(|r| SummaryRow::new(format!("{}:{}", r.case, r.check), r.observed, r.min_eig, summary.seed, r.trials))
                .collect();
            write_report(&summary, &rows, cfg)?;
            Ok(Outcome::from_violation(!summary.passed))
        }
    }
}
