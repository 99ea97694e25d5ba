//! Factorization of tracial maps through the center of their domain, and the
//! mixed-homogeneous component machinery used for the nonlinear case.
//!
//! Every finite-dimensional algebra here is a finite direct sum of matrix
//! blocks, so the center is `C^p` with p the block count and there is no
//! properly infinite summand to split off.

mod extraction;
mod lift;

pub use extraction::{extract_homogeneous_components, ExtractionConfig, HomogeneousComponentTable};
pub use lift::multilinear_lift;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraShape, Element};
use crate::maps::{center_restriction_builder, compose, Claim, Linearity, MapBuilder, MapDescriptor, MapError, MapSpec};
use crate::random::{random_element, trial_rng};

/// Largest total degree the polarization lift supports.
pub const MAX_LIFT_DEGREE: usize = 3;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DecompositionError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("map '{0}' is not declared tracial")]
    NotTracial(String),
    #[error("map '{0}' is not declared completely positive")]
    NotCompletelyPositive(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid extraction grid: {0}")]
    InvalidGrid(String),
    #[error("radial system is ill-conditioned (condition number {condition:.3e}); widen the radii")]
    IllConditioned { condition: f64 },
    #[error("polarization supports total degree at most 3, got ({m},{n})")]
    PolarizationOrder { m: usize, n: usize },
    #[error("lift diagonal differs from the component by {error:.3e}; the map is not ({m},{n})-homogeneous")]
    InconsistentDiagonal { m: usize, n: usize, error: f64 },
    #[error("extraction error {error:.3e} exceeds tolerance {tol:.3e}")]
    ExtractionAboveTolerance { error: f64, tol: f64 },
    #[error("residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualAboveTolerance { residual: f64, tol: f64 },
}

impl From<DecompositionError> for MapError {
    fn from(e: DecompositionError) -> Self {
        match e {
            DecompositionError::Map(m) => m,
            DecompositionError::Algebra(a) => MapError::Algebra(a),
            other => MapError::InvalidSpec(other.to_string()),
        }
    }
}

/// `Φ ≈ φ₂ ∘ φ₁` with `φ₁` landing in the commutative algebra `C^p`.
#[derive(Clone, Debug)]
pub struct TracialDecomposition {
    pub phi1: MapDescriptor,
    pub phi2: MapDescriptor,
    /// `φ₂ ∘ φ₁`, registered with the claims it inherits.
    pub composed: MapDescriptor,
    /// Largest `‖Φ(args) − φ₂(φ₁(args))‖` over the verification samples.
    pub residual: f64,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub certified: bool,
    /// Sample with the largest residual, kept when certification fails.
    pub witness: Option<Vec<Element>>,
    /// Radial Vandermonde condition number (nonlinear decompositions only).
    pub condition_number: Option<f64>,
    /// Bidegrees summed into `φ₂` (nonlinear decompositions only).
    pub components: Vec<(usize, usize)>,
}

/// JSON form of a decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub verdict: String,
    pub phi1: Option<MapSpec>,
    pub phi2: Option<MapSpec>,
    pub residual: f64,
    pub certified: bool,
    pub condition_number: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub witness: Option<Vec<Element>>,
}

impl TracialDecomposition {
    pub fn verdict(&self) -> &'static str {
        if self.certified {
            "decomposed"
        } else {
            "not_decomposed"
        }
    }

    pub fn report(&self) -> DecompositionReport {
        DecompositionReport {
            verdict: self.verdict().to_string(),
            phi1: self.phi1.spec().cloned(),
            phi2: self.phi2.spec().cloned(),
            residual: self.residual,
            certified: self.certified,
            condition_number: self.condition_number,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            witness: self.witness.clone(),
        }
    }
}

fn sample_args(map: &MapDescriptor, seed: u64, index: u64) -> Vec<Element> {
    let mut rng = trial_rng(seed, index);
    map.domain_shapes().iter().map(|s| random_element(&mut rng, s)).collect()
}

/// Largest `‖Φ − Ψ‖` over seeded random inputs, with the arguments attaining it.
fn max_residual(
    map: &MapDescriptor,
    other: &MapDescriptor,
    samples: u64,
    seed: u64,
) -> Result<(f64, Vec<Element>), DecompositionError> {
    let residuals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let args = sample_args(map, seed, t);
            Ok(map.evaluate(&args)?.distance(&other.evaluate(&args)?)?)
        })
        .collect::<Result<_, DecompositionError>>()?;
    let (worst, residual) =
        residuals.iter().enumerate().fold((0, 0.0_f64), |(bi, b), (i, &r)| if r > b { (i, r) } else { (bi, b) });
    Ok((residual, sample_args(map, seed, worst as u64)))
}

fn finish(
    map: &MapDescriptor,
    phi1: MapDescriptor,
    phi2: MapDescriptor,
    composed: MapDescriptor,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<TracialDecomposition, DecompositionError> {
    let (residual, worst) = max_residual(map, &composed, samples, seed)?;
    let certified = residual <= tol;
    Ok(TracialDecomposition {
        phi1,
        phi2,
        composed,
        residual,
        samples,
        seed,
        tol,
        certified,
        witness: if certified { None } else { Some(worst) },
        condition_number: None,
        components: Vec::new(),
    })
}

/// Factors a tracial linear or multilinear map through the slot-wise
/// center-valued traces.
pub fn decompose_tracial(
    map: &MapDescriptor,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<TracialDecomposition, DecompositionError> {
    if !map.has_claim(Claim::Tracial) {
        return Err(DecompositionError::NotTracial(map.name().to_string()));
    }
    if !matches!(map.linearity(), Linearity::Linear | Linearity::Multilinear) {
        return Err(DecompositionError::Unsupported(
            "linear or multilinear map required; use the nonlinear decomposition".into(),
        ));
    }
    let slots = map.domain_shapes().to_vec();
    let phi1 = MapSpec::SlotCenterTrace { slots: slots.clone() }.build()?;
    let mut b2 = center_restriction_builder(map.clone(), &slots)?;
    if let Some(s) = map.spec() {
        b2 = b2.spec(MapSpec::CenterRestriction { map: Box::new(s.clone()), slots: slots.clone() });
    }
    let phi2 = b2.register()?;
    let composed = compose(&phi1, &phi2)?.linearity(map.linearity()).register()?;
    finish(map, phi1, phi2, composed, samples, seed, tol)
}

/// `Φ(A) = tr(A)·P` for a tracial linear map on one matrix block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub coefficient: Element,
    pub residual: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Reads `P = Φ(I)/d` and certifies `Φ(A) = tr(A)·P` on random inputs.
pub fn tracial_linear_canonical_form(
    map: &MapDescriptor,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<CanonicalForm, DecompositionError> {
    if map.arity() != 1 || !map.is_linear() || map.domain_shapes()[0].block_count() != 1 {
        return Err(DecompositionError::Unsupported("linear map on a single matrix block required".into()));
    }
    let shape = &map.domain_shapes()[0];
    let d = shape.dims()[0] as f64;
    let coefficient = map.evaluate(&map.unit_args())?.scale_real(1.0 / d);
    let residuals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|t| {
            let args = sample_args(map, seed, t);
            let closed = coefficient.scale(args[0].trace());
            Ok(map.evaluate(&args)?.distance(&closed)?)
        })
        .collect::<Result<_, DecompositionError>>()?;
    let residual = residuals.into_iter().fold(0.0, f64::max);
    if residual > tol {
        return Err(DecompositionError::ResidualAboveTolerance { residual, tol });
    }
    Ok(CanonicalForm { coefficient, residual, samples, seed })
}

fn lift_parts(
    map: &MapDescriptor,
    shape: &AlgebraShape,
    degree: usize,
) -> Result<(MapBuilder, HomogeneousComponentTable), DecompositionError> {
    if degree == 0 || degree > MAX_LIFT_DEGREE {
        return Err(DecompositionError::Unsupported(format!("truncation degree must lie in 1..=3, got {degree}")));
    }
    if map.arity() != 1 || &map.domain_shapes()[0] != shape {
        return Err(DecompositionError::Unsupported("single-argument map on the given shape required".into()));
    }
    let table = extract_homogeneous_components(map, &ExtractionConfig::new(degree))?;
    let p = shape.block_count();
    let base = table.base_point_value.clone();
    let parts: Vec<((usize, usize), MapDescriptor)> =
        table.components.iter().filter(|(k, _)| **k != (0, 0)).map(|(k, c)| (*k, c.clone())).collect();
    let shape2 = shape.clone();
    let builder = MapDescriptor::builder(
        "nonlinear_center_lift",
        vec![AlgebraShape::commutative(2 * degree * p)],
        map.codomain_shape().clone(),
        move |args| {
            let x = args[0].coords();
            let copy = |i: usize| Element::block_scalars(&shape2, &x[i * p..(i + 1) * p]).expect("coordinate count");
            let mut out = base.clone();
            for ((m, n), c) in &parts {
                let hol: Vec<Element> = (0..*m).map(copy).collect();
                let anti: Vec<Element> = (0..*n).map(|l| copy(degree + l)).collect();
                out = &out + &lift::lift_unchecked(c, *m, *n, &hol, &anti);
            }
            out
        },
    )
    .linearity(Linearity::Polynomial { degree });
    Ok((builder, table))
}

/// `Φ(0) + Σ Φ^{(m,n)}(x₁,…,x_m, ȳ₁,…,ȳ_n)` on `C^{2Dp}`: copy i of the
/// center coordinates feeds holomorphic slot i and conjugate copy l feeds
/// antiholomorphic slot l.
pub fn nonlinear_center_lift_builder(
    map: &MapDescriptor,
    shape: &AlgebraShape,
    degree: usize,
) -> Result<MapBuilder, MapError> {
    Ok(lift_parts(map, shape, degree)?.0)
}

/// Factors a tracial completely positive single-argument map through a
/// bundle of center-valued traces of A and of its conjugate, truncated at
/// total degree `degree`.
pub fn decompose_tracial_nonlinear(
    map: &MapDescriptor,
    degree: usize,
    samples: u64,
    seed: u64,
    tol: f64,
) -> Result<TracialDecomposition, DecompositionError> {
    if !map.has_claim(Claim::Tracial) {
        return Err(DecompositionError::NotTracial(map.name().to_string()));
    }
    if map.positivity_order() != usize::MAX {
        return Err(DecompositionError::NotCompletelyPositive(map.name().to_string()));
    }
    if map.arity() != 1 {
        return Err(DecompositionError::Unsupported("single-argument map required".into()));
    }
    let shape = map.domain_shapes()[0].clone();
    let (mut b2, table) = lift_parts(map, &shape, degree)?;
    if table.extraction_error > tol {
        return Err(DecompositionError::ExtractionAboveTolerance { error: table.extraction_error, tol });
    }
    if let Some(s) = map.spec() {
        b2 = b2.spec(MapSpec::NonlinearCenterLift { map: Box::new(s.clone()), shape: shape.clone(), degree });
    }
    let phi1 = MapSpec::CenterBundle { shape, copies: degree }.build()?;
    let phi2 = b2.register()?;
    // Claims of the composite hold by construction; spot-checking them would
    // cost thousands of polarization grids per trial.
    let composed = compose(&phi1, &phi2)?.build_unverified();
    let mut out = finish(map, phi1, phi2, composed, samples, seed, tol)?;
    out.condition_number = Some(table.condition_number);
    out.components = table.components.keys().copied().collect();
    Ok(out)
}
