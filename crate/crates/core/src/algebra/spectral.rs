use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{AlgebraError, AlgebraShape, CMatrix, Element, ToleranceConfig, C64};

/// Outcome of a positivity test on one element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityCheck {
    pub verdict: bool,
    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub min_eig: f64,
    pub herm_deviation: f64,
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part of
/// `m` is read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of the Hermitian part of `m`: ascending eigenvalues
/// and the matching unitary whose columns are eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    if d == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of the Hermitian part across all blocks.
pub fn min_eigenvalue(x: &Element) -> f64 {
    x.blocks()
        .iter()
        .map(|b| hermitian_eigenvalues(b)[0])
        .fold(f64::INFINITY, f64::min)
}

/// PSD test with a relative eigenvalue floor. A Hermitian deviation above
/// `herm_tol·(1+‖X‖)` is a negative verdict, with the spectrum of the
/// Hermitian part still reported.
pub fn is_positive(x: &Element, tol: &ToleranceConfig) -> PositivityCheck {
    let scale = 1.0 + x.norm();
    let herm_deviation = x.hermitian_deviation();
    let min_eig = min_eigenvalue(x);
    let verdict = herm_deviation <= tol.herm_tol * scale && min_eig >= -tol.psd_tol * scale;
    PositivityCheck { verdict, min_eig, herm_deviation }
}

/// Applies a real function to a Hermitian element by spectral calculus,
/// blockwise. Eigenvalues below zero are clamped to zero when `clamp` is set.
pub fn apply_spectral_function(x: &Element, f: &dyn Fn(f64) -> f64, clamp: bool) -> Element {
    let blocks = x
        .blocks()
        .iter()
        .map(|b| {
            let (vals, u) = hermitian_eigen(b);
            let d = b.nrows();
            let fd = CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    let v = if clamp { vals[i].max(0.0) } else { vals[i] };
                    C64::new(f(v), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &u * fd * u.adjoint()
        })
        .collect();
    Element::new(x.shape().clone(), blocks).expect("spectral calculus keeps the shape")
}

/// Assembles an `n×n` array of elements into one element of `M_n(A)`: for
/// each block b the `(n d_b)×(n d_b)` matrix with `(i,j)` sub-block taken from
/// `entries[i][j]`.
pub fn block_matrix(entries: &[Vec<Element>]) -> Result<Element, AlgebraError> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|row| row.len() != n) {
        return Err(AlgebraError::Mismatch("block matrix must be a nonempty square array".into()));
    }
    let shape = entries[0][0].shape().clone();
    for row in entries {
        for e in row {
            if e.shape() != &shape {
                return Err(AlgebraError::ShapeMismatch { left: shape.clone(), right: e.shape().clone() });
            }
        }
    }
    let blocks = shape
        .dims()
        .iter()
        .enumerate()
        .map(|(b, &d)| {
            let mut m = CMatrix::zeros(n * d, n * d);
            for (i, row) in entries.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    m.view_mut((i * d, j * d), (d, d)).copy_from(e.block(b));
                }
            }
            m
        })
        .collect();
    Element::new(shape.amplified(n), blocks)
}

/// Inverse of [`block_matrix`]: reads an element of `M_n(A)` as an `n×n` array.
pub fn block_entries(x: &Element, n: usize) -> Result<Vec<Vec<Element>>, AlgebraError> {
    if n == 0 || x.shape().dims().iter().any(|d| d % n != 0) {
        return Err(AlgebraError::Mismatch(format!(
            "shape {} is not an {n}-fold amplification",
            x.shape()
        )));
    }
    let base = AlgebraShape::new(x.shape().dims().iter().map(|d| d / n).collect())?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let blocks = base
                .dims()
                .iter()
                .zip(x.blocks())
                .map(|(&d, m)| m.view((i * d, j * d), (d, d)).into_owned())
                .collect();
            row.push(Element::new(base.clone(), blocks)?);
        }
        out.push(row);
    }
    Ok(out)
}

/// Conditional expectation onto the center: block i becomes
/// `(tr X_i / d_i) I`.
pub fn center_valued_trace(x: &Element) -> Element {
    let coeffs: Vec<C64> = x
        .block_traces()
        .iter()
        .zip(x.shape().dims())
        .map(|(t, &d)| t / d as f64)
        .collect();
    Element::block_scalars(x.shape(), &coeffs).expect("one coefficient per block")
}

/// Result of [`block_positive_2x2`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPositivity {
    pub verdict: bool,
    pub min_eig: f64,
    /// Schur-complement verdict on each rung of the epsilon ladder.
    pub ladder: Vec<bool>,
    /// True when every rung agrees with the eigenvalue verdict.
    pub consistent: bool,
}

pub const EPSILON_LADDER: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Positivity of `[[A, X], [X*, B]]`, decided by eigenvalues and
/// cross-checked against `B - X*(A+εI)^{-1}X ⪰ 0` (with `A ⪰ 0`) on a
/// decreasing ladder of ε.
pub fn block_positive_2x2(
    a: &Element,
    x: &Element,
    b: &Element,
    tol: &ToleranceConfig,
) -> Result<BlockPositivity, AlgebraError> {
    a.require_same_shape(x)?;
    a.require_same_shape(b)?;
    let assembled = block_matrix(&[vec![a.clone(), x.clone()], vec![x.adjoint(), b.clone()]])?;
    let check = is_positive(&assembled, tol);
    let a_positive = is_positive(a, tol).verdict;
    let scale = 1.0 + a.norm();
    let ladder: Vec<bool> = EPSILON_LADDER
        .iter()
        .map(|&eps| {
            if !a_positive {
                return false;
            }
            let shift = Element::identity(a.shape()).scale_real(eps * scale);
            let blocks: Option<Vec<CMatrix>> = (a + &shift)
                .blocks()
                .iter()
                .map(|m| m.clone().try_inverse())
                .collect();
            let Some(inv_blocks) = blocks else { return false };
            let inv = Element::new(a.shape().clone(), inv_blocks).expect("inverse keeps shape");
            let complement = b - &(&(&x.adjoint() * &inv) * x);
            is_positive(&complement, tol).verdict
        })
        .collect();
    let consistent = ladder.iter().all(|&v| v == check.verdict);
    Ok(BlockPositivity { verdict: check.verdict, min_eig: check.min_eig, ladder, consistent })
}
