//! Seeded samplers. Every randomized check derives its per-trial generator
//! from `seed ^ trial_index`, so trials can run in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraShape, CMatrix, Element, C64};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed ^ index)
}

pub fn seeded_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which Gaussian ensemble fills random matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    #[default]
    Complex,
    Real,
}

pub fn gaussian(rng: &mut TrialRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn complex_gaussian(rng: &mut TrialRng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(gaussian(rng) * s, gaussian(rng) * s)
}

pub fn gaussian_matrix(rng: &mut TrialRng, rows: usize, cols: usize, population: Population) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| match population {
        Population::Complex => complex_gaussian(rng),
        Population::Real => C64::new(gaussian(rng), 0.0),
    })
}

fn normalized(x: Element) -> Element {
    let n = x.norm();
    if n > 0.0 {
        x.scale_real(1.0 / n)
    } else {
        x
    }
}

/// Gram-built PSD element `GG*` scaled to norm one.
pub fn random_psd(rng: &mut TrialRng, shape: &AlgebraShape, population: Population) -> Element {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| {
            let g = gaussian_matrix(rng, d, d, population);
            &g * g.adjoint()
        })
        .collect();
    normalized(Element::new(shape.clone(), blocks).expect("sampled blocks match shape"))
}

/// Hermitian `(G + G*)/2` scaled to norm one.
pub fn random_hermitian(rng: &mut TrialRng, shape: &AlgebraShape) -> Element {
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| {
            let g = gaussian_matrix(rng, d, d, Population::Complex);
            (&g + g.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    normalized(Element::new(shape.clone(), blocks).expect("sampled blocks match shape"))
}

/// Unstructured complex Gaussian element scaled to norm one.
pub fn random_element(rng: &mut TrialRng, shape: &AlgebraShape) -> Element {
    let blocks = shape.dims().iter().map(|&d| gaussian_matrix(rng, d, d, Population::Complex)).collect();
    normalized(Element::new(shape.clone(), blocks).expect("sampled blocks match shape"))
}

/// Matrix with orthonormal columns (`V*V = I`), rows ≥ cols.
pub fn random_isometry(rng: &mut TrialRng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = gaussian_matrix(rng, rows, cols, Population::Complex);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix column phases so the distribution does not depend on QR conventions.
    let mut q = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn random_unitary(rng: &mut TrialRng, d: usize) -> CMatrix {
    random_isometry(rng, d, d)
}

/// Full-rank density matrix with trace one on every block combined.
pub fn random_density(rng: &mut TrialRng, shape: &AlgebraShape) -> Element {
    let p = random_psd(rng, shape, Population::Complex);
    let t = p.trace().re;
    p.scale_real(1.0 / t)
}
