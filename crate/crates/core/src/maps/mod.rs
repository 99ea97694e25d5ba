//! k-ary maps between block algebras: descriptors, a JSON spec language,
//! the two amplifications, Choi matrices, and randomized/exact testers.

mod amplify;
mod choi;
mod descriptor;
pub mod generators;
mod spec;
mod testers;

pub use amplify::{amplify_type1, amplify_type2};
pub use choi::{
    choi_matrix, commuting_projection_probe, is_completely_positive_exact, matrix_unit_probe, ChoiMatrix, KrausSet,
};
pub use descriptor::{Claim, Evaluator, Linearity, MapBuilder, MapDescriptor, StoredWitness, DEFAULT_DEGREE_BOUND};
pub use spec::{center_restriction_builder, compose, fitzgerald_probes, JsonMatrix, Letter, MapDocument, MapSpec, MonomialTerm, TraceTerm, WordTerm};
pub use testers::{
    check_monotone, check_self_adjoint, evaluate_notion, notion_target, test_choi_inequality, test_positive,
    test_superadditive, test_tracial, ChoiInputs, DeviationReport, Notion, PositivityReport, TesterConfig,
    TracialReport, Verdict,
};

use thiserror::Error;

use crate::algebra::{AlgebraError, AlgebraShape};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MapError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("argument {slot} has shape {found}, expected {expected}")]
    ArgumentShape { slot: usize, expected: AlgebraShape, found: AlgebraShape },
    #[error("type-1 amplification needs identical domain shapes")]
    HeterogeneousDomains,
    #[error("invalid notion: {0}")]
    InvalidNotion(String),
    #[error("invalid map spec: {0}")]
    InvalidSpec(String),
    #[error("map '{map}' rejected at registration: {reason}")]
    Registration { map: String, reason: String },
    #[error("evaluator misbehaved: {0}")]
    Evaluator(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
}
