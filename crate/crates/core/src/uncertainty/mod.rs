//! Variance, covariance and skew-information quantities of maps, with margin
//! checkers for the matrix and scalar uncertainty inequalities they satisfy.
//!
//! Arguments are tuples with one element per slot; single-argument maps take
//! one-element slices. Products and adjoints of tuples are slotwise.

mod partial;
mod skew;
mod variance;

pub use partial::{
    composite_matrix, composite_report, partial_covariance, partial_variance, partial_variance_report, pvc_matrix,
    pvc_report, slot_compress, slot_pair, tensor_uncertainty_bound, CommutatorMode, CompositeInputs, TensorInputs,
};
pub use skew::{
    classical_correlation, left_multiply_map, sandwich_map, skew_correlation, skew_information, skew_matrix,
    skew_report, DensityOperator, Normalization, SpectralFunctionPair,
};
pub use variance::{
    assemble_vc_matrix, covariance, heisenberg_suite, schrodinger_margin, slot_variance_upper_bound, variance,
    variance_domination, variance_upper_bound, vc_matrix, vc_report,
};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{is_positive, AlgebraError, Element, ToleranceConfig};
use crate::maps::{MapDescriptor, MapError};
use crate::random::{trial_rng, TrialRng};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum UncertaintyError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("map '{map}' lacks the required property: {property}")]
    MissingProperty { map: String, property: String },
    #[error("f and g are not of the same monotonicity at spectrum points {x} and {y}")]
    NotSameMonotonic { x: f64, y: f64 },
    #[error("denominator vanishes: {0}")]
    DegenerateDenominator(String),
    #[error("slot index {index} out of range for arity {arity}")]
    Index { index: usize, arity: usize },
    #[error("slot pair needs two different slots, got {0} twice")]
    SameSlot(usize),
    #[error("map '{0}' does not have a commutative codomain")]
    NonCommutativeCodomain(String),
    #[error("element is not self-adjoint (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn missing(map: &MapDescriptor, property: impl Into<String>) -> UncertaintyError {
    UncertaintyError::MissingProperty { map: map.name().to_string(), property: property.into() }
}

/// Self-adjoint element.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Element", into = "Element")]
pub struct Observable(Element);

impl Observable {
    pub fn new(element: Element, tol: &ToleranceConfig) -> Result<Self, UncertaintyError> {
        let deviation = element.hermitian_deviation();
        if deviation > tol.herm_tol * (1.0 + element.norm()) {
            return Err(UncertaintyError::NotHermitian { deviation });
        }
        Ok(Self(element))
    }

    pub fn element(&self) -> &Element {
        &self.0
    }

    pub fn into_element(self) -> Element {
        self.0
    }
}

impl TryFrom<Element> for Observable {
    type Error = UncertaintyError;

    fn try_from(e: Element) -> Result<Self, Self::Error> {
        Self::new(e, &ToleranceConfig::default())
    }
}

impl From<Observable> for Element {
    fn from(o: Observable) -> Self {
        o.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityVerdict {
    Holds,
    Violated,
}

impl fmt::Display for InequalityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InequalityVerdict::Holds => "holds",
            InequalityVerdict::Violated => "violated",
        })
    }
}

/// Signed margin of one inequality: the smallest eigenvalue of the matrix
/// asserted to be PSD, or the smallest coordinate of LHS − RHS. Negative
/// margins are never clipped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub quantity: String,
    pub margin: f64,
    pub verdict: InequalityVerdict,
    /// Absolute slack below zero still counted as holding.
    pub tol: f64,
    /// Inputs the margin was computed from.
    pub witness: Vec<Element>,
    pub seed: Option<u64>,
}

impl InequalityReport {
    pub fn new(quantity: impl Into<String>, margin: f64, tol: f64, witness: Vec<Element>) -> Self {
        let verdict = if margin >= -tol { InequalityVerdict::Holds } else { InequalityVerdict::Violated };
        Self { quantity: quantity.into(), margin, verdict, tol, witness, seed: None }
    }

    /// Report for a matrix asserted to be PSD; the slack scales with its norm.
    pub fn psd(quantity: impl Into<String>, matrix: &Element, tol: &ToleranceConfig, witness: Vec<Element>) -> Self {
        let check = is_positive(matrix, tol);
        Self::new(quantity, check.min_eig, tol.psd_tol * (1.0 + matrix.norm()), witness)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == InequalityVerdict::Holds
    }
}

/// Worst margin per quantity over a seeded batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub quantity: String,
    pub trials: u64,
    pub seed: u64,
    pub min_margin: f64,
    /// Trial index attaining the minimum (lowest index on ties).
    pub worst_trial: u64,
    pub worst: InequalityReport,
}

const SURVEY_CHUNK: u64 = 256;

/// Runs `trial` on `trial_rng(seed, t)` for every t and keeps, for each
/// quantity, the smallest margin. Trials run in parallel chunks; the result
/// does not depend on the thread count.
pub fn survey<F>(trials: u64, seed: u64, trial: F) -> Result<Vec<SurveySummary>, UncertaintyError>
where
    F: Fn(&mut TrialRng) -> Result<Vec<InequalityReport>, UncertaintyError> + Sync,
{
    let mut best: Vec<SurveySummary> = Vec::new();
    let mut start = 0;
    while start < trials {
        let end = (start + SURVEY_CHUNK).min(trials);
        let batch: Vec<(u64, Vec<InequalityReport>)> = (start..end)
            .into_par_iter()
            .map(|t| trial(&mut trial_rng(seed, t)).map(|r| (t, r)))
            .collect::<Result<_, _>>()?;
        for (t, reports) in batch {
            for r in reports {
                match best.iter_mut().find(|s| s.quantity == r.quantity) {
                    Some(s) if r.margin < s.min_margin => {
                        s.min_margin = r.margin;
                        s.worst_trial = t;
                        s.worst = r.with_seed(seed ^ t);
                    }
                    Some(_) => {}
                    None => best.push(SurveySummary {
                        quantity: r.quantity.clone(),
                        trials,
                        seed,
                        min_margin: r.margin,
                        worst_trial: t,
                        worst: r.with_seed(seed ^ t),
                    }),
                }
            }
        }
        start = end;
    }
    Ok(best)
}

fn check_tuple(map: &MapDescriptor, args: &[Element]) -> Result<(), UncertaintyError> {
    if args.len() != map.arity() {
        return Err(MapError::Arity { expected: map.arity(), found: args.len() }.into());
    }
    for (slot, (a, s)) in args.iter().zip(map.domain_shapes()).enumerate() {
        if a.shape() != s {
            return Err(MapError::ArgumentShape { slot, expected: s.clone(), found: a.shape().clone() }.into());
        }
    }
    Ok(())
}

fn tuple_adjoint(a: &[Element]) -> Vec<Element> {
    a.iter().map(Element::adjoint).collect()
}

fn tuple_mul(a: &[Element], b: &[Element]) -> Vec<Element> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn tuple_sub(a: &[Element], b: &[Element]) -> Vec<Element> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn tuple_add(a: &[Element], b: &[Element]) -> Vec<Element> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn tuple_scale(a: &[Element], c: f64) -> Vec<Element> {
    a.iter().map(|x| x.scale_real(c)).collect()
}

/// Unit tuple with `x` in slot i.
fn pad(map: &MapDescriptor, i: usize, x: &Element) -> Vec<Element> {
    let mut t = map.unit_args();
    t[i] = x.clone();
    t
}

/// Zero tuple with `x` in slot i.
fn pad_zero(map: &MapDescriptor, i: usize, x: &Element) -> Vec<Element> {
    let mut t = map.zero_args();
    t[i] = x.clone();
    t
}

fn require_commutative(map: &MapDescriptor) -> Result<(), UncertaintyError> {
    if map.codomain_shape().is_commutative() {
        Ok(())
    } else {
        Err(UncertaintyError::NonCommutativeCodomain(map.name().to_string()))
    }
}

fn require_zero_at_zero(map: &MapDescriptor, tol: &ToleranceConfig) -> Result<(), UncertaintyError> {
    let z = map.evaluate(&map.zero_args())?;
    if z.norm() > tol.eq_tol {
        return Err(missing(map, format!("Φ(0) = 0 (‖Φ(0)‖ = {:.3e})", z.norm())));
    }
    Ok(())
}

fn require_property_d(map: &MapDescriptor, m: usize) -> Result<(), UncertaintyError> {
    match map.property_d_order() {
        Some(o) if o >= m => Ok(()),
        _ => Err(missing(map, format!("property_d({m})"))),
    }
}
