use serde::{Deserialize, Serialize};

use super::{amplify_type2, MapDescriptor, MapError};
use crate::algebra::{block_matrix, hermitian_eigen, is_positive, AlgebraShape, CMatrix, Element, ToleranceConfig, C64};

/// Choi matrix `Σ_ij E_ij ⊗ Φ(E_ij)` of a linear map on `M_d`, stored as an
/// element of `M_d ⊗ codomain`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChoiMatrix {
    pub matrix: Element,
    pub domain_dim: usize,
    pub codomain_shape: AlgebraShape,
}

/// The PSD element `[E_ij]_{i,j<n}` of `M_n(A)`, with `E_ij` the matrix
/// units of each block (zero where an index exceeds the block size).
pub fn matrix_unit_probe(shape: &AlgebraShape, n: usize) -> Element {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| {
            let mut m = CMatrix::zeros(n * d, n * d);
            let r = n.min(d);
            for i in 0..r {
                for j in 0..r {
                    m[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
                }
            }
            m
        })
        .collect();
    Element::new(shape.amplified(n), blocks).expect("probe matches amplified shape")
}

/// The PSD element `[[P−Q, P−Q, 0], [P−Q, P, Q], [0, Q, Q]]` with `P = I`
/// and `Q = E_11`, padded with zeros to order n ≥ 3. Separates 2-positive
/// from 3-positive maps such as the operator norm.
pub fn commuting_projection_probe(shape: &AlgebraShape, n: usize) -> Element {
    assert!(n >= 3);
    let p = Element::identity(shape);
    let q = Element::new(
        shape.clone(),
        shape
            .dims()
            .iter()
            .map(|&d| {
                let mut m = CMatrix::zeros(d, d);
                m[(0, 0)] = C64::new(1.0, 0.0);
                m
            })
            .collect(),
    )
    .expect("shape matches");
    let z = Element::zeros(shape);
    let pq = &p - &q;
    let mut rows = vec![vec![z.clone(); n]; n];
    rows[0][0] = pq.clone();
    rows[0][1] = pq.clone();
    rows[1][0] = pq;
    rows[1][1] = p;
    rows[1][2] = q.clone();
    rows[2][1] = q.clone();
    rows[2][2] = q;
    block_matrix(&rows).expect("uniform shape")
}

fn single_block_dim(map: &MapDescriptor) -> Result<usize, MapError> {
    if !map.is_linear() || map.arity() != 1 {
        return Err(MapError::NotApplicable("Choi matrices need a linear single-argument map".into()));
    }
    let dims = map.domain_shapes()[0].dims();
    if dims.len() != 1 {
        return Err(MapError::NotApplicable("Choi matrices need a single-block domain".into()));
    }
    Ok(dims[0])
}

pub fn choi_matrix(map: &MapDescriptor) -> Result<ChoiMatrix, MapError> {
    let d = single_block_dim(map)?;
    let matrix = amplify_type2(map, d, &[matrix_unit_probe(&map.domain_shapes()[0], d)])?;
    Ok(ChoiMatrix { matrix, domain_dim: d, codomain_shape: map.codomain_shape().clone() })
}

/// Exact complete-positivity certificate: the Choi matrix is PSD.
pub fn is_completely_positive_exact(choi: &ChoiMatrix, tol: &ToleranceConfig) -> (bool, f64) {
    let c = is_positive(&choi.matrix, tol);
    (c.verdict, c.min_eig)
}

impl ChoiMatrix {
    /// Kraus operators read off the spectral decomposition (PSD Choi only):
    /// `V_r` has columns `√λ_r` times the slices of eigenvector r.
    pub fn kraus_operators(&self, tol: &ToleranceConfig) -> Result<KrausSet, MapError> {
        if self.matrix.shape().block_count() != 1 {
            return Err(MapError::NotApplicable("Kraus form needs a single-block codomain".into()));
        }
        let (vals, vecs) = hermitian_eigen(self.matrix.block(0));
        let d = self.domain_dim;
        let c = self.codomain_shape.dims()[0];
        let floor = tol.psd_tol * (1.0 + self.matrix.norm());
        let mut ops = Vec::new();
        for (r, &lam) in vals.iter().enumerate() {
            if lam < -floor {
                return Err(MapError::NotApplicable("Choi matrix is not PSD".into()));
            }
            if lam <= floor {
                continue;
            }
            let s = lam.sqrt();
            ops.push(CMatrix::from_fn(c, d, |row, col| vecs[(col * c + row, r)] * s));
        }
        if ops.is_empty() {
            ops.push(CMatrix::zeros(c, d));
        }
        KrausSet::new(ops)
    }
}

/// Kraus representation `Φ(X) = Σ_r V_r X V_r*` with `V_r` of size
/// codomain × domain.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self, MapError> {
        let Some(first) = operators.first() else {
            return Err(MapError::InvalidSpec("Kraus set must be nonempty".into()));
        };
        let (r, c) = first.shape();
        if r == 0 || c == 0 || operators.iter().any(|v| v.shape() != (r, c)) {
            return Err(MapError::InvalidSpec("Kraus operators must share nonzero dimensions".into()));
        }
        Ok(Self { operators })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn domain_dim(&self) -> usize {
        self.operators[0].ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.codomain_dim(), self.codomain_dim());
        for v in &self.operators {
            out += v * x * v.adjoint();
        }
        out
    }

    /// `Σ V_r V_r*`, which is `Φ(I)`.
    pub fn unit_image(&self) -> CMatrix {
        self.apply(&CMatrix::identity(self.domain_dim(), self.domain_dim()))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        let c = self.codomain_dim();
        (self.unit_image() - CMatrix::identity(c, c)).norm() <= tol
    }

    /// Rescales to `V_r ← S^{-1/2} V_r` with `S = Σ V_r V_r*`, making the map
    /// unital. Fails when S is singular.
    pub fn normalized(&self) -> Result<Self, MapError> {
        let s = self.unit_image();
        let (vals, u) = hermitian_eigen(&s);
        if vals[0] <= 1e-12 * vals[vals.len() - 1].max(1.0) {
            return Err(MapError::NotApplicable("Kraus unit image is singular".into()));
        }
        let c = s.nrows();
        let inv_sqrt = CMatrix::from_fn(c, c, |i, j| {
            if i == j { C64::new(1.0 / vals[i].sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
        });
        let t = &u * inv_sqrt * u.adjoint();
        Ok(Self { operators: self.operators.iter().map(|v| &t * v).collect() })
    }
}
