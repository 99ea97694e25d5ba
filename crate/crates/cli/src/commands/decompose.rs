use std::path::PathBuf;

use clap::Args;
use opmap_core::decomposition::{
    decompose_tracial, decompose_tracial_nonlinear, DecompositionError, DecompositionReport,
};
use opmap_core::maps::Linearity;
use serde::Serialize;

use super::{load_map, write_report};
use crate::output::SummaryRow;
use crate::{InputError, Outcome, RunConfig};

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Map spec JSON; must claim `tracial`.
    pub spec: PathBuf,
    /// Truncation degree D for nonlinear maps.
    #[arg(long = "degree", short = 'D', default_value_t = 2)]
    pub degree: usize,
    /// Fresh random inputs used to measure the residual.
    #[arg(long, default_value_t = 50)]
    pub samples: u64,
}

#[derive(Serialize)]
struct DecomposeOutput {
    #[serde(flatten)]
    report: DecompositionReport,
    /// Bidegrees (m, n) of the extracted components; nonlinear maps only.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    components: Vec<(usize, usize)>,
}

pub fn run(args: &DecomposeArgs, cfg: &RunConfig) -> Result<Outcome, InputError> {
    let (_, map) = load_map(&args.spec)?;
    let tol = cfg.tolerances()?.psd_tol;
    let result = match map.linearity() {
        Linearity::Linear | Linearity::Multilinear => decompose_tracial(&map, args.samples, cfg.seed, tol),
        _ => decompose_tracial_nonlinear(&map, args.degree, args.samples, cfg.seed, tol),
    };
    let dec = match result {
        Ok(d) => d,
        Err(DecompositionError::ExtractionAboveTolerance { error, tol }) => {
            eprintln!("homogeneous extraction error {error:.3e} exceeds tolerance {tol:.3e}");
            return Ok(Outcome::Violation);
        }
        Err(e) => return Err(e.into()),
    };
    let out = DecomposeOutput { report: dec.report(), components: dec.components.clone() };
    let row = SummaryRow::new(map.name(), dec.verdict(), dec.residual, dec.seed, dec.samples);
    write_report(&out, &[row], cfg)?;
    Ok(Outcome::from_violation(!dec.certified))
}
