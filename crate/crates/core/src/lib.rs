//! Numerical verification toolkit for positive linear, multilinear and
//! nonlinear maps between finite-dimensional C*-algebras.
//!
//! Algebras are direct sums of full complex matrix blocks. On top of that the
//! crate provides map descriptors with both amplification notions for
//! multimaps, exact and sampled positivity testers, factorization of tracial
//! maps through the center, mixed-homogeneous component extraction, and
//! margin checkers for operator variance/covariance uncertainty relations.

pub mod algebra;
pub mod decomposition;
pub mod gallery;
pub mod maps;
pub mod random;
pub mod uncertainty;

pub use algebra::{AlgebraShape, CMatrix, Element, ToleranceConfig, C64};
