//! Block algebras `M_{d_1} ⊕ ... ⊕ M_{d_r}`, their elements, and the spectral
//! primitives everything else is built on.

mod disk;
mod element;
mod shape;
mod spectral;
mod tolerance;

pub use disk::{min_enclosing_disk, normal_spectrum, smallest_disk, smallest_disk_radius, Disk};
pub use element::{matrix_from_json, matrix_to_json, spectral_norm, CMatrix, Element, C64};
pub use shape::AlgebraShape;
pub use spectral::{
    apply_spectral_function, block_entries, block_matrix, block_positive_2x2, center_valued_trace,
    hermitian_eigen, hermitian_eigenvalues, is_positive, min_eigenvalue, BlockPositivity, PositivityCheck,
};
pub use tolerance::ToleranceConfig;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AlgebraError {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: AlgebraShape, right: AlgebraShape },
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("malformed element data: {0}")]
    Parse(String),
    #[error("element is not normal (commutator norm {deviation:.3e})")]
    NonNormal { deviation: f64 },
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
}
