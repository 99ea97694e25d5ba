use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::DecompositionError;
use crate::algebra::{Element, C64};
use crate::maps::{Linearity, MapDescriptor, MapError};
use crate::random::{complex_gaussian, random_element, trial_rng};

/// Grid and probe settings for [`extract_homogeneous_components`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExtractionConfig {
    /// Largest total degree D kept.
    pub degree: usize,
    /// D+1 distinct positive radii.
    pub radii: Vec<f64>,
    /// Number of equispaced angles; must exceed 2D.
    pub angles: usize,
    /// Random probes for component norms; as many again are held out for
    /// the reconstruction error.
    pub probes: usize,
    pub seed: u64,
    /// Condition numbers above this abort the extraction.
    pub max_condition: f64,
}

impl ExtractionConfig {
    /// Radii `1/2, 3/4, 1, …` and `4D + 4` angles.
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            radii: (0..=degree).map(|j| 0.5 + 0.25 * j as f64).collect(),
            angles: 4 * degree + 4,
            probes: 8,
            seed: 0xC0_4D,
            max_condition: 1e8,
        }
    }
}

/// Fourier-in-angle, Vandermonde-in-radius separation of `Φ(zA)`.
#[derive(Debug)]
pub(crate) struct Extractor {
    map: MapDescriptor,
    degree: usize,
    radii: Vec<f64>,
    angles: usize,
    /// Inverse of `V[j][s] = r_j^s`.
    vinv: DMatrix<f64>,
    keys: Vec<(usize, usize)>,
}

impl Extractor {
    fn new(map: &MapDescriptor, cfg: &ExtractionConfig) -> Result<(Self, f64), DecompositionError> {
        let d = cfg.degree;
        if cfg.radii.len() != d + 1 {
            return Err(DecompositionError::InvalidGrid(format!("{} radii given, {} needed", cfg.radii.len(), d + 1)));
        }
        if cfg.radii.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(DecompositionError::InvalidGrid("radii must be positive and finite".into()));
        }
        if cfg.angles <= 2 * d {
            return Err(DecompositionError::InvalidGrid(format!("{} angles cannot separate degree {d}", cfg.angles)));
        }
        let v = DMatrix::from_fn(d + 1, d + 1, |j, s| cfg.radii[j].powi(s as i32));
        let sv = v.clone().svd(false, false).singular_values;
        let smin = sv.min();
        let condition = if smin > 0.0 { sv.max() / smin } else { f64::INFINITY };
        if !(condition <= cfg.max_condition) {
            return Err(DecompositionError::IllConditioned { condition });
        }
        let vinv = v.try_inverse().ok_or(DecompositionError::IllConditioned { condition })?;
        let keys = (0..=d).flat_map(|s| (0..=s).map(move |m| (m, s - m))).collect();
        let ex = Extractor { map: map.clone(), degree: d, radii: cfg.radii.clone(), angles: cfg.angles, vinv, keys };
        Ok((ex, condition))
    }

    pub(crate) fn keys(&self) -> &[(usize, usize)] {
        &self.keys
    }

    /// All components at `a`, in the order of [`Self::keys`].
    pub(crate) fn components_at(&self, a: &Element) -> Vec<Element> {
        let d = self.degree as i64;
        let t_count = self.angles;
        let zero = Element::zeros(self.map.codomain_shape());
        let width = (2 * d + 1) as usize;
        // g[j][q + D] = (1/T) Σ_t Φ(r_j e^{iθ_t} A) e^{−iqθ_t}
        let mut g = vec![vec![zero.clone(); width]; self.radii.len()];
        for (j, &r) in self.radii.iter().enumerate() {
            for t in 0..t_count {
                let theta = 2.0 * PI * t as f64 / t_count as f64;
                let value = self.map.eval(&[a.scale(C64::from_polar(r, theta))]);
                for (qi, slot) in g[j].iter_mut().enumerate() {
                    let q = qi as i64 - d;
                    let w = C64::from_polar(1.0 / t_count as f64, -(q as f64) * theta);
                    *slot = &*slot + &value.scale(w);
                }
            }
        }
        self.keys
            .iter()
            .map(|&(m, n)| {
                if (m, n) == (0, 0) {
                    return self.map.eval(&[Element::zeros(a.shape())]);
                }
                let s = m + n;
                let qi = (m as i64 - n as i64 + d) as usize;
                let mut out = zero.clone();
                for (j, row) in g.iter().enumerate() {
                    out = &out + &row[qi].scale_real(self.vinv[(s, j)]);
                }
                out
            })
            .collect()
    }

    fn component_at(&self, key: (usize, usize), a: &Element) -> Element {
        let idx = self.keys.iter().position(|k| *k == key).expect("known component");
        self.components_at(a).swap_remove(idx)
    }
}

/// Components `Φ_{m,n}` with `m + n ≤ D` of a single-argument map.
#[derive(Clone, Debug)]
pub struct HomogeneousComponentTable {
    pub degree: usize,
    /// Each component as a `MixedHomogeneous { m, n }` descriptor.
    pub components: BTreeMap<(usize, usize), MapDescriptor>,
    /// `Φ(0)`, which is also the (0,0) component.
    pub base_point_value: Element,
    /// Largest `‖Φ(A) − Σ Φ_{m,n}(A)‖` on held-out probes.
    pub extraction_error: f64,
    /// Condition number of the radial Vandermonde system.
    pub condition_number: f64,
    /// Largest component norm over the probes.
    pub probe_norms: BTreeMap<(usize, usize), f64>,
    extractor: Arc<Extractor>,
}

impl HomogeneousComponentTable {
    pub fn component(&self, m: usize, n: usize) -> Option<&MapDescriptor> {
        self.components.get(&(m, n))
    }

    pub fn evaluate_all(&self, a: &Element) -> Result<BTreeMap<(usize, usize), Element>, MapError> {
        self.extractor.map.evaluate(std::slice::from_ref(a))?;
        Ok(self.extractor.keys().iter().copied().zip(self.extractor.components_at(a)).collect())
    }

    /// `Σ_{m+n≤D} Φ_{m,n}(A)`.
    pub fn reconstruct(&self, a: &Element) -> Result<Element, MapError> {
        let parts = self.evaluate_all(a)?;
        let zero = Element::zeros(self.extractor.map.codomain_shape());
        Ok(parts.values().fold(zero, |acc, v| &acc + v))
    }

    /// Largest relative deviation from `Φ_{m,n}(zA) = z^m z̄^n Φ_{m,n}(A)`
    /// over random `(z, A)` and all components.
    pub fn homogeneity_residual(&self, trials: u64, seed: u64) -> Result<f64, MapError> {
        let shape = &self.extractor.map.domain_shapes()[0];
        let mut worst = 0.0_f64;
        for t in 0..trials {
            let mut rng = trial_rng(seed, t);
            let a = random_element(&mut rng, shape);
            let z = complex_gaussian(&mut rng);
            let base = self.extractor.components_at(&a);
            let scaled = self.extractor.components_at(&a.scale(z));
            for ((&(m, n), b), s) in self.extractor.keys().iter().zip(&base).zip(&scaled) {
                let expected = b.scale(z.powu(m as u32) * z.conj().powu(n as u32));
                let err = s.distance(&expected)? / (1.0 + s.norm() + expected.norm());
                worst = worst.max(err);
            }
        }
        Ok(worst)
    }
}

/// Separates `Φ(zA) = Σ z^m z̄^n Φ_{m,n}(A)` by a discrete Fourier transform
/// in `arg z` and a Vandermonde solve in `|z|`. Exact for polynomial maps of
/// degree at most D; for anything else `extraction_error` measures the
/// truncation on held-out probes.
pub fn extract_homogeneous_components(
    map: &MapDescriptor,
    cfg: &ExtractionConfig,
) -> Result<HomogeneousComponentTable, DecompositionError> {
    if map.arity() != 1 {
        return Err(DecompositionError::Unsupported("component extraction needs a single-argument map".into()));
    }
    let (extractor, condition_number) = Extractor::new(map, cfg)?;
    let extractor = Arc::new(extractor);
    let shape = map.domain_shapes()[0].clone();
    let base_point_value = map.evaluate(&[Element::zeros(&shape)])?;
    let components = extractor
        .keys()
        .iter()
        .map(|&(m, n)| {
            let ex = Arc::clone(&extractor);
            let desc = MapDescriptor::builder(
                format!("{}[{m},{n}]", map.name()),
                vec![shape.clone()],
                map.codomain_shape().clone(),
                move |args| ex.component_at((m, n), &args[0]),
            )
            .linearity(Linearity::MixedHomogeneous { m, n })
            .build_unverified();
            ((m, n), desc)
        })
        .collect();
    let mut probe_norms: BTreeMap<(usize, usize), f64> = extractor.keys().iter().map(|k| (*k, 0.0)).collect();
    for p in 0..cfg.probes as u64 {
        let a = random_element(&mut trial_rng(cfg.seed, p), &shape);
        for (k, v) in extractor.keys().iter().zip(extractor.components_at(&a)) {
            let e = probe_norms.get_mut(k).expect("key present");
            *e = e.max(v.norm());
        }
    }
    let mut extraction_error = 0.0_f64;
    for p in 0..cfg.probes as u64 {
        let a = random_element(&mut trial_rng(cfg.seed, cfg.probes as u64 + p), &shape);
        let zero = Element::zeros(map.codomain_shape());
        let sum = extractor.components_at(&a).iter().fold(zero, |acc, v| &acc + v);
        extraction_error = extraction_error.max(map.evaluate(&[a])?.distance(&sum)?);
    }
    Ok(HomogeneousComponentTable {
        degree: cfg.degree,
        components,
        base_point_value,
        extraction_error,
        condition_number,
        probe_norms,
        extractor,
    })
}
