//! Seeded families of maps with known structure.

use rand::Rng;

use super::spec::{JsonMatrix, MonomialTerm, TraceTerm};
use super::{KrausSet, Linearity, MapDescriptor, MapError, MapSpec};
use crate::algebra::{apply_spectral_function, AlgebraShape, CMatrix, Element};
use crate::random::{gaussian_matrix, random_density, random_isometry, random_psd, seeded_rng, Population, TrialRng};

/// Kraus map with `count` Gaussian operators `M_{d_in} → M_{d_out}`;
/// `unital` rescales them so that `Σ V_r V_r* = I`.
pub fn random_kraus_map(
    seed: u64,
    d_in: usize,
    d_out: usize,
    count: usize,
    unital: bool,
) -> Result<MapDescriptor, MapError> {
    let mut rng = seeded_rng(seed);
    let scale = 1.0 / ((count * d_in) as f64).sqrt();
    let ops: Vec<CMatrix> =
        (0..count).map(|_| gaussian_matrix(&mut rng, d_out, d_in, Population::Complex) * crate::C64::new(scale, 0.0)).collect();
    let mut kraus = KrausSet::new(ops)?;
    if unital {
        kraus = kraus.normalized()?;
    }
    MapSpec::Kraus { operators: kraus.operators().iter().cloned().map(JsonMatrix).collect() }.build()
}

/// `X ↦ Σ_r ε_r V_r X V_r*` with random signs: Hermitian preserving, but
/// completely positive only when the signs happen to allow it.
pub fn random_signed_kraus_map(seed: u64, d: usize, count: usize) -> Result<MapDescriptor, MapError> {
    let mut rng = seeded_rng(seed);
    let ops: Vec<(f64, CMatrix)> = (0..count)
        .map(|_| {
            let sign = if rng.random::<f64>() < 0.3 { -1.0 } else { 1.0 };
            (sign, gaussian_matrix(&mut rng, d, d, Population::Complex))
        })
        .collect();
    let shape = AlgebraShape::square(d);
    MapDescriptor::builder("signed_kraus", vec![shape.clone()], shape, move |args| {
        let x = args[0].block(0);
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for (s, v) in &ops {
            out += (v * x * v.adjoint()) * crate::C64::new(*s, 0.0);
        }
        Element::from_matrix(out).expect("square output")
    })
    .linearity(Linearity::Linear)
    .register()
}

/// PSD elements on `shape` that sum to the identity.
pub fn unital_partition(rng: &mut TrialRng, shape: &AlgebraShape, count: usize, weights: &[f64]) -> Vec<Element> {
    let raw: Vec<Element> = (0..count).map(|_| random_psd(rng, shape, Population::Complex)).collect();
    let mut total = Element::zeros(shape);
    for (q, &w) in raw.iter().zip(weights.iter().chain(std::iter::repeat(&1.0))) {
        total = &total + &q.scale_real(w);
    }
    let inv_sqrt = apply_spectral_function(&total, &|v| 1.0 / v.sqrt(), false);
    raw.iter().map(|q| &(&inv_sqrt * q) * &inv_sqrt).collect()
}

/// `⊕M_i ↦ Σ tr(M_i) P_i` with random PSD `P_i`; when `unital`, the
/// coefficients satisfy `Σ d_i P_i = I`.
pub fn random_tracial_linear_spec(rng: &mut TrialRng, shape: &AlgebraShape, codomain: &AlgebraShape, unital: bool) -> MapSpec {
    let coefficients = if unital {
        let dims: Vec<f64> = shape.dims().iter().map(|&d| d as f64).collect();
        unital_partition(rng, codomain, shape.block_count(), &dims)
    } else {
        (0..shape.block_count()).map(|_| random_psd(rng, codomain, Population::Complex)).collect()
    };
    MapSpec::TracialLinear { domain: shape.clone(), coefficients }
}

pub fn random_tracial_linear(
    seed: u64,
    shape: &AlgebraShape,
    codomain: &AlgebraShape,
    unital: bool,
) -> Result<MapDescriptor, MapError> {
    random_tracial_linear_spec(&mut seeded_rng(seed), shape, codomain, unital).build()
}

/// `Σ_j (∏_l tr A^l_{b_l(j)}) P_j` with random block choices and PSD `P_j`.
pub fn random_tracial_multilinear(
    seed: u64,
    shapes: &[AlgebraShape],
    codomain: &AlgebraShape,
    terms: usize,
) -> Result<MapDescriptor, MapError> {
    let mut rng = seeded_rng(seed);
    let terms = (0..terms.max(1))
        .map(|_| TraceTerm {
            blocks: shapes.iter().map(|s| rng.random_range(0..s.block_count())).collect(),
            coefficient: random_psd(&mut rng, codomain, Population::Complex),
        })
        .collect();
    MapSpec::TracialMultilinear { domains: shapes.to_vec(), terms }.build()
}

/// `V*(A_1 ⊗ ⋯ ⊗ A_k)V` with V a random isometry, hence unital.
pub fn random_cp_multilinear(seed: u64, dims: &[usize], out_dim: usize) -> Result<MapDescriptor, MapError> {
    let mut rng = seeded_rng(seed);
    let rows: usize = dims.iter().product();
    if out_dim > rows {
        return Err(MapError::InvalidSpec(format!("output dimension {out_dim} exceeds {rows}")));
    }
    MapSpec::CpMultilinear { dims: dims.to_vec(), isometry: JsonMatrix(random_isometry(&mut rng, rows, out_dim)) }.build()
}

/// Options for maps that factor through a commutative algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredMapOptions {
    /// Number of commutative coordinates.
    pub coords: usize,
    pub codomain: AlgebraShape,
    /// Largest total degree of the outer monomials (at least 1).
    pub max_degree: u32,
    pub terms: usize,
    /// Use a tracial inner map (normalized block traces) instead of states.
    pub tracial: bool,
}

fn random_exponents(rng: &mut TrialRng, coords: usize, max_degree: u32) -> (Vec<u32>, Vec<u32>) {
    loop {
        let total = rng.random_range(1..=max_degree.max(1));
        let mut h = vec![0u32; coords];
        let mut a = vec![0u32; coords];
        for _ in 0..total {
            let j = rng.random_range(0..coords);
            if rng.random::<bool>() {
                h[j] += 1;
            } else {
                a[j] += 1;
            }
        }
        if total > 0 {
            return (h, a);
        }
    }
}

/// Unital `φ₂ ∘ φ₁` with `φ₁` positive linear into `C^p` (states or
/// normalized block traces) and `φ₂` a sum of monomials with PSD
/// coefficients adding up to the identity. Every monomial has degree at
/// least one, so `Φ(0) = 0`.
pub fn random_factored_spec(rng: &mut TrialRng, shape: &AlgebraShape, opts: &FactoredMapOptions) -> MapSpec {
    let p = opts.coords;
    let inner = if opts.tracial {
        // ψ_j(A) = Σ_b w_{jb} tr(A_b)/d_b with row-stochastic weights.
        let blocks = shape.block_count();
        let weights: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                let w: Vec<f64> = (0..blocks).map(|_| rng.random::<f64>() + 0.1).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        let coefficients = (0..blocks)
            .map(|b| {
                let d = shape.dims()[b] as f64;
                let coords: Vec<crate::C64> = (0..p).map(|j| crate::C64::new(weights[j][b] / d, 0.0)).collect();
                Element::diagonal_coords(&coords)
            })
            .collect();
        MapSpec::TracialLinear { domain: shape.clone(), coefficients }
    } else {
        MapSpec::StateBundle { slots: vec![(0..p).map(|_| random_density(rng, shape)).collect()] }
    };
    let coeffs = unital_partition(rng, &opts.codomain, opts.terms.max(1), &[]);
    let terms = coeffs
        .into_iter()
        .map(|coefficient| {
            let (holomorphic, antiholomorphic) = random_exponents(rng, p, opts.max_degree);
            MonomialTerm { holomorphic, antiholomorphic, coefficient }
        })
        .collect();
    MapSpec::Composite { inner: Box::new(inner), outer: Box::new(MapSpec::Monomial { coords: p, terms }) }
}

pub fn random_factored_map(seed: u64, shape: &AlgebraShape, opts: &FactoredMapOptions) -> Result<MapDescriptor, MapError> {
    random_factored_spec(&mut seeded_rng(seed), shape, opts).build()
}

/// Multilinear map `Σ_t ∏_i ω_{i,j_i(t)}(A_i) P_t` built from per-slot
/// states `ω` and a unital PSD partition `P_t`.
pub fn random_factored_multilinear_spec(
    rng: &mut TrialRng,
    shapes: &[AlgebraShape],
    states_per_slot: usize,
    codomain: &AlgebraShape,
    terms: usize,
) -> MapSpec {
    let slots: Vec<Vec<Element>> =
        shapes.iter().map(|s| (0..states_per_slot).map(|_| random_density(rng, s)).collect()).collect();
    let p = states_per_slot * shapes.len();
    let coeffs = unital_partition(rng, codomain, terms.max(1), &[]);
    let terms = coeffs
        .into_iter()
        .map(|coefficient| {
            let mut holomorphic = vec![0u32; p];
            for i in 0..shapes.len() {
                holomorphic[i * states_per_slot + rng.random_range(0..states_per_slot)] = 1;
            }
            MonomialTerm { holomorphic, antiholomorphic: Vec::new(), coefficient }
        })
        .collect();
    MapSpec::Composite {
        inner: Box::new(MapSpec::StateBundle { slots }),
        outer: Box::new(MapSpec::Monomial { coords: p, terms }),
    }
}

pub fn random_factored_multilinear(
    seed: u64,
    shapes: &[AlgebraShape],
    states_per_slot: usize,
    codomain: &AlgebraShape,
    terms: usize,
) -> Result<MapDescriptor, MapError> {
    random_factored_multilinear_spec(&mut seeded_rng(seed), shapes, states_per_slot, codomain, terms).build()
}

/// State functional `A ↦ tr(ρA)` on `C^1`.
pub fn state_functional(rho: Element) -> Result<MapDescriptor, MapError> {
    MapSpec::StateBundle { slots: vec![vec![rho]] }.build()
}
