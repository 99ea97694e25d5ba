use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Block structure of a finite-dimensional C*-algebra: the side lengths of
/// its full matrix blocks, in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct AlgebraShape {
    dims: Vec<usize>,
}

impl AlgebraShape {
    pub fn new(dims: Vec<usize>) -> Result<Self, AlgebraError> {
        if dims.is_empty() {
            return Err(AlgebraError::InvalidShape("shape needs at least one block".into()));
        }
        if dims.contains(&0) {
            return Err(AlgebraError::InvalidShape(format!(
                "block dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(Self { dims })
    }

    /// A single full matrix block `M_d`.
    pub fn square(d: usize) -> Self {
        Self::new(vec![d]).expect("block dimension must be positive")
    }

    /// The commutative algebra `C^p` (p blocks of size one).
    pub fn commutative(p: usize) -> Self {
        Self::new(vec![1; p]).expect("coordinate count must be positive")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn block_count(&self) -> usize {
        self.dims.len()
    }

    /// Complex dimension of the algebra, the sum of squared block sides.
    pub fn total_dimension(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    /// Shape of `M_n(A)`: every block side multiplied by `n`.
    pub fn amplified(&self, n: usize) -> Self {
        assert!(n >= 1, "amplification order must be positive");
        Self { dims: self.dims.iter().map(|d| d * n).collect() }
    }

    /// Shape of the tensor product, blocks in lexicographic (left, right) order.
    pub fn tensor(&self, other: &AlgebraShape) -> Self {
        let dims = self
            .dims
            .iter()
            .flat_map(|a| other.dims.iter().map(move |b| a * b))
            .collect();
        Self { dims }
    }

    /// Direct sum of several shapes, blocks concatenated in order.
    pub fn direct_sum(shapes: &[AlgebraShape]) -> Result<Self, AlgebraError> {
        Self::new(shapes.iter().flat_map(|s| s.dims.iter().copied()).collect())
    }
}

impl TryFrom<Vec<usize>> for AlgebraShape {
    type Error = AlgebraError;

    fn try_from(dims: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(dims)
    }
}

impl From<AlgebraShape> for Vec<usize> {
    fn from(shape: AlgebraShape) -> Self {
        shape.dims
    }
}

impl std::fmt::Display for AlgebraShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.dims)
    }
}
