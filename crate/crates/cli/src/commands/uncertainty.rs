use std::path::PathBuf;

use clap::Args;
use opmap_core::algebra::{Element, ToleranceConfig};
use opmap_core::maps::{MapDescriptor, MapDocument};
use opmap_core::uncertainty::{
    assemble_vc_matrix, composite_report, heisenberg_suite, partial_variance_report, pvc_report, schrodinger_margin,
    skew_report, slot_variance_upper_bound, tensor_uncertainty_bound, variance_upper_bound, CommutatorMode,
    CompositeInputs, DensityOperator, InequalityReport, Normalization, SpectralFunctionPair, TensorInputs,
    UncertaintyError,
};
use serde::Deserialize;

use super::{read_json, write_report};
use crate::output::SummaryRow;
use crate::{InputError, Outcome, RunConfig};

pub const CHECKS: &[&str] = &[
    "vc",
    "schrodinger",
    "heisenberg",
    "variance_upper_bound",
    "partial_variance",
    "pvc",
    "skew",
    "composite",
    "tensor_bound",
];

#[derive(Args, Debug)]
pub struct UncertaintyArgs {
    /// Bundle JSON: map, observables and optional density.
    pub bundle: PathBuf,
    /// Comma-separated checks; overrides the bundle's list.
    #[arg(long, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
}

#[derive(Deserialize, Debug)]
struct CompositeSection {
    #[serde(flatten)]
    inputs: CompositeInputs,
    #[serde(default = "default_mode")]
    mode: CommutatorMode,
}

fn default_mode() -> CommutatorMode {
    CommutatorMode::Nonlinear
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct Bundle {
    map: MapDocument,
    /// Argument tuple A, one element per slot.
    #[serde(default)]
    a: Option<Vec<Element>>,
    #[serde(default)]
    b: Option<Vec<Element>>,
    #[serde(default)]
    density: Option<Element>,
    #[serde(default)]
    normalization: Normalization,
    /// Exponent of the pair f = t^(1−α), g = t^α.
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default)]
    composite: Option<CompositeSection>,
    #[serde(default)]
    tensor: Option<TensorInputs>,
    #[serde(default)]
    checks: Vec<String>,
    #[serde(default)]
    seed: Option<u64>,
}

fn default_alpha() -> f64 {
    0.5
}

fn need<'a, T>(field: &'a Option<T>, check: &str, name: &str) -> Result<&'a T, InputError> {
    field.as_ref().ok_or_else(|| InputError(format!("check '{check}' needs '{name}' in the bundle")))
}

fn first<'a>(tuple: &'a [Element], check: &str) -> Result<&'a Element, InputError> {
    match tuple {
        [x] => Ok(x),
        _ => Err(InputError(format!("check '{check}' needs a single-element tuple 'a'"))),
    }
}

fn run_check(
    check: &str,
    bundle: &Bundle,
    map: &MapDescriptor,
    tol: &ToleranceConfig,
) -> Result<Vec<InequalityReport>, InputError> {
    let a = || need(&bundle.a, check, "a");
    let b = || need(&bundle.b, check, "b");
    let reports: Result<Vec<InequalityReport>, UncertaintyError> = match check {
        // The matrix is evaluated whatever the map claims, so a failing
        // hypothesis shows up as a negative margin rather than a refusal.
        "vc" => {
            let (a, b) = (a()?, b()?);
            assemble_vc_matrix(map, a, b).map(|m| vec![InequalityReport::psd("vc_matrix", &m, tol, [a.as_slice(), b].concat())])
        }
        "schrodinger" => schrodinger_margin(map, a()?, b()?, tol).map(|r| vec![r]),
        "heisenberg" => heisenberg_suite(map, a()?, b()?, tol),
        "variance_upper_bound" => {
            let a = a()?;
            if map.arity() == 1 {
                variance_upper_bound(map, first(a, check)?, tol).map(|r| vec![r])
            } else {
                (0..a.len()).map(|slot| slot_variance_upper_bound(map, slot, &a[slot], tol)).collect()
            }
        }
        "partial_variance" => partial_variance_report(map, a()?, tol).map(|r| vec![r]),
        "pvc" => pvc_report(map, a()?, b()?, tol).map(|r| vec![r]),
        "skew" => {
            let rho = DensityOperator::new(need(&bundle.density, check, "density")?.clone(), bundle.normalization, Some(map), tol)?;
            let pair = SpectralFunctionPair::power_pair(bundle.alpha);
            skew_report(map, &rho, &pair, first(a()?, check)?, first(b()?, check)?, tol).map(|r| vec![r])
        }
        "composite" => {
            let c = need(&bundle.composite, check, "composite")?;
            composite_report(map, &c.inputs, c.mode, tol)
        }
        "tensor_bound" => tensor_uncertainty_bound(map, need(&bundle.tensor, check, "tensor")?, tol),
        other => {
            return Err(InputError(format!("unknown check '{other}'; expected one of {}", CHECKS.join(", "))));
        }
    };
    Ok(reports?)
}

pub fn run(args: &UncertaintyArgs, cfg: &RunConfig) -> Result<Outcome, InputError> {
    let bundle: Bundle = read_json(&args.bundle)?;
    let checks = args.checks.clone().unwrap_or_else(|| bundle.checks.clone());
    if checks.is_empty() {
        return Err(InputError("no checks requested".into()));
    }
    if let Some(bad) = checks.iter().find(|c| !CHECKS.contains(&c.as_str())) {
        return Err(InputError(format!("unknown check '{bad}'; expected one of {}", CHECKS.join(", "))));
    }
    let map = bundle.map.build()?;
    let tol = cfg.tolerances()?;
    let seed = bundle.seed.unwrap_or(cfg.seed);
    let mut reports = Vec::new();
    for check in &checks {
        reports.extend(run_check(check, &bundle, &map, &tol)?.into_iter().map(|r| r.with_seed(seed)));
    }
    let rows: Vec<SummaryRow> =
        reports.iter().map(|r| SummaryRow::new(&r.quantity, r.verdict, r.margin, seed, 1)).collect();
    write_report(&reports, &rows, cfg)?;
    Ok(Outcome::from_violation(reports.iter().any(|r| !r.holds())))
}
