use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraError, AlgebraShape};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// A member of a block algebra: one dense complex square matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    shape: AlgebraShape,
    blocks: Vec<CMatrix>,
}

impl Element {
    pub fn new(shape: AlgebraShape, blocks: Vec<CMatrix>) -> Result<Self, AlgebraError> {
        if blocks.len() != shape.block_count() {
            return Err(AlgebraError::Mismatch(format!(
                "shape {shape} has {} blocks, got {}",
                shape.block_count(),
                blocks.len()
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(shape.dims()).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(AlgebraError::Mismatch(format!(
                    "block {i} should be {d}x{d}, got {}x{}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { shape, blocks })
    }

    /// Builds an element whose shape is read off square blocks.
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self, AlgebraError> {
        let dims = blocks.iter().map(|b| b.nrows()).collect();
        Self::new(AlgebraShape::new(dims)?, blocks)
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self, AlgebraError> {
        Self::from_blocks(vec![m])
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.dims().iter().map(|&d| CMatrix::zeros(d, d)).collect();
        Self { shape: shape.clone(), blocks }
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape.dims().iter().map(|&d| CMatrix::identity(d, d)).collect();
        Self { shape: shape.clone(), blocks }
    }

    /// Block-scalar element `c_b * I` in block b.
    pub fn block_scalars(shape: &AlgebraShape, coeffs: &[C64]) -> Result<Self, AlgebraError> {
        if coeffs.len() != shape.block_count() {
            return Err(AlgebraError::Mismatch(format!(
                "{} coefficients for {} blocks",
                coeffs.len(),
                shape.block_count()
            )));
        }
        let blocks = shape
            .dims()
            .iter()
            .zip(coeffs)
            .map(|(&d, &c)| CMatrix::identity(d, d) * c)
            .collect();
        Ok(Self { shape: shape.clone(), blocks })
    }

    /// Element of `C^p` with the given coordinates.
    pub fn diagonal_coords(coords: &[C64]) -> Self {
        Self::block_scalars(&AlgebraShape::commutative(coords.len()), coords)
            .expect("coordinate list must be nonempty")
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    /// Entries of a commutative element read as a coordinate vector.
    pub fn coords(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b[(0, 0)]).collect()
    }

    fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self { shape: self.shape.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self, AlgebraError> {
        self.require_same_shape(other)?;
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Ok(Self { shape: self.shape.clone(), blocks })
    }

    pub fn require_same_shape(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.shape != other.shape {
            return Err(AlgebraError::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    /// Entrywise complex conjugate; realizes the conjugate algebra.
    pub fn conj(&self) -> Self {
        self.map_blocks(|b| b.map(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        self.map_blocks(|b| b.transpose())
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|b| b * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|b| b * C64::new(c, 0.0))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a - b)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a * b)
    }

    /// Blockwise entrywise (Hadamard) product.
    pub fn schur(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a.component_mul(b))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a * b - b * a)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.zip_blocks(other, |a, b| a * b + b * a)
    }

    /// Tensor product; blocks are Kronecker products in lexicographic
    /// (left block, right block) order.
    pub fn tensor(&self, other: &Self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| other.blocks.iter().map(move |b| a.kronecker(b)))
            .collect();
        Self { shape: self.shape.tensor(&other.shape), blocks }
    }

    /// C*-norm: largest spectral norm over the blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Operator-norm distance `‖self - other‖`.
    pub fn distance(&self, other: &Self) -> Result<f64, AlgebraError> {
        Ok(self.checked_sub(other)?.norm())
    }

    /// `‖X - X*‖`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.blocks.iter().map(|b| spectral_norm(&(b - b.adjoint()))).fold(0.0, f64::max)
    }

    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(|b| (b + b.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn block_traces(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b.trace()).collect()
    }

    /// Sum of the traces of all blocks.
    pub fn trace(&self) -> C64 {
        self.block_traces().into_iter().sum()
    }

    pub fn max_abs_entry_diff(&self, other: &Self) -> Result<f64, AlgebraError> {
        self.require_same_shape(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    pub fn is_block_scalar(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let c = b[(0, 0)];
            let d = b.nrows();
            (0..d).all(|i| (0..d).all(|j| {
                let target = if i == j { c } else { C64::new(0.0, 0.0) };
                (b[(i, j)] - target).norm() <= tol
            }))
        })
    }

    /// Concatenates elements into one element on the direct-sum shape.
    pub fn direct_sum(parts: &[Element]) -> Result<Self, AlgebraError> {
        if parts.is_empty() {
            return Err(AlgebraError::InvalidShape("direct sum of nothing".into()));
        }
        let blocks: Vec<CMatrix> = parts.iter().flat_map(|p| p.blocks.iter().cloned()).collect();
        Self::from_blocks(blocks)
    }

    /// Inverse of [`Element::direct_sum`] for the given summand shapes.
    pub fn split(&self, shapes: &[AlgebraShape]) -> Result<Vec<Element>, AlgebraError> {
        let expected = AlgebraShape::direct_sum(shapes)?;
        if expected != self.shape {
            return Err(AlgebraError::ShapeMismatch { left: expected, right: self.shape.clone() });
        }
        let mut out = Vec::with_capacity(shapes.len());
        let mut offset = 0;
        for s in shapes {
            let n = s.block_count();
            out.push(Element { shape: s.clone(), blocks: self.blocks[offset..offset + n].to_vec() });
            offset += n;
        }
        Ok(out)
    }
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

impl Add for &Element {
    type Output = Element;

    /// Panics on shape mismatch; use [`Element::checked_add`] for untrusted input.
    fn add(self, rhs: &Element) -> Element {
        self.checked_add(rhs).expect("element addition")
    }
}

impl Sub for &Element {
    type Output = Element;

    fn sub(self, rhs: &Element) -> Element {
        self.checked_sub(rhs).expect("element subtraction")
    }
}

impl Mul for &Element {
    type Output = Element;

    fn mul(self, rhs: &Element) -> Element {
        self.multiply(rhs).expect("element multiplication")
    }
}

impl Neg for &Element {
    type Output = Element;

    fn neg(self) -> Element {
        self.scale_real(-1.0)
    }
}

/// Wire format: `{"shape":[d1,...],"blocks":[[[ [re,im], ... ], ...], ...]}`.
#[derive(Serialize, Deserialize)]
struct ElementJson {
    shape: Vec<usize>,
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Parses a row-major `[[ [re,im], ... ], ...]` matrix, rejecting ragged rows.
pub fn matrix_from_json(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, AlgebraError> {
    let r = rows.len();
    if r == 0 {
        return Err(AlgebraError::Parse("matrix has no rows".into()));
    }
    let c = rows[0].len();
    if c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(AlgebraError::Parse("ragged or empty matrix rows".into()));
    }
    if rows.iter().flatten().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(AlgebraError::Parse("non-finite matrix entry".into()));
    }
    Ok(CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ElementJson {
            shape: self.shape.dims().to_vec(),
            blocks: self.blocks.iter().map(matrix_to_json).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = ElementJson::deserialize(deserializer)?;
        let shape = AlgebraShape::new(raw.shape).map_err(serde::de::Error::custom)?;
        let blocks = raw
            .blocks
            .iter()
            .map(|b| matrix_from_json(b))
            .collect::<Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        Element::new(shape, blocks).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit(d: usize, i: usize, j: usize) -> Element {
        let mut m = CMatrix::zeros(d, d);
        m[(i, j)] = c(1.0, 0.0);
        Element::from_matrix(m).unwrap()
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let shape = AlgebraShape::new(vec![2, 3]).unwrap();
        let x = Element::new(
            shape.clone(),
            vec![
                CMatrix::from_fn(2, 2, |i, j| c(i as f64, j as f64 + 1.0)),
                CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, -1.0)),
            ],
        )
        .unwrap();
        assert_eq!(&Element::identity(&shape) * &x, x);
        assert_eq!(x.adjoint().adjoint(), x);
    }

    #[test]
    fn multiply_acts_blockwise() {
        let a = Element::from_blocks(vec![
            CMatrix::from_fn(2, 2, |i, j| c((i + j) as f64, 0.0)),
            CMatrix::from_fn(3, 3, |i, j| c(i as f64 - j as f64, 1.0)),
        ])
        .unwrap();
        let p = &a * &a;
        assert_eq!(p.block(0), &(a.block(0) * a.block(0)));
        assert_eq!(p.block(1), &(a.block(1) * a.block(1)));
    }

    #[test]
    fn commutator_of_matrix_units() {
        let e11 = unit(2, 0, 0);
        let e12 = unit(2, 0, 1);
        assert_eq!(e11.commutator(&e12).unwrap(), e12);
        assert_eq!(e11.commutator(&e11).unwrap(), Element::zeros(e11.shape()));
    }

    #[test]
    fn pauli_anticommutator_vanishes() {
        let sx = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])).unwrap();
        let sy = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])).unwrap();
        assert!(sx.anticommutator(&sy).unwrap().norm() < 1e-15);
    }

    #[test]
    fn schur_with_disjoint_support_is_zero() {
        let z = unit(2, 0, 1).schur(&unit(2, 1, 0)).unwrap();
        assert_eq!(z.norm(), 0.0);
        let ones = Element::from_matrix(CMatrix::from_element(2, 2, c(1.0, 0.0))).unwrap();
        let x = unit(2, 1, 0).scale(c(2.0, -3.0));
        assert_eq!(x.schur(&ones).unwrap(), x);
    }

    #[test]
    fn tensor_of_units_has_single_entry() {
        let t = unit(2, 0, 0).tensor(&unit(2, 0, 0));
        assert_eq!(t.shape().dims(), &[4]);
        assert_eq!(t.block(0)[(0, 0)], c(1.0, 0.0));
        assert_eq!(t.block(0).iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Element::identity(&AlgebraShape::square(2));
        let b = Element::identity(&AlgebraShape::square(3));
        assert!(a.multiply(&b).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let x = Element::from_blocks(vec![
            CMatrix::from_fn(2, 2, |i, j| c(0.1 * i as f64 + 1.0 / 3.0, -(j as f64).sqrt())),
            CMatrix::from_element(1, 1, c(std::f64::consts::PI, 1e-300)),
        ])
        .unwrap();
        let s = serde_json::to_string(&x).unwrap();
        let y: Element = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn json_rejects_ragged_and_mismatched() {
        let ragged = r#"{"shape":[2],"blocks":[[[[1,0],[0,0]],[[0,0]]]]}"#;
        assert!(serde_json::from_str::<Element>(ragged).is_err());
        let wrong = r#"{"shape":[1],"blocks":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(serde_json::from_str::<Element>(wrong).is_err());
    }

    #[test]
    fn split_inverts_direct_sum() {
        let a = Element::identity(&AlgebraShape::new(vec![2, 1]).unwrap());
        let b = unit(3, 1, 2);
        let s = Element::direct_sum(&[a.clone(), b.clone()]).unwrap();
        let parts = s.split(&[a.shape().clone(), b.shape().clone()]).unwrap();
        assert_eq!(parts, vec![a, b]);
    }
}
