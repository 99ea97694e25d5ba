use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{missing, require_property_d, require_zero_at_zero, InequalityReport, UncertaintyError};
use crate::algebra::{apply_spectral_function, block_matrix, hermitian_eigenvalues, is_positive, Element, ToleranceConfig, C64};
use crate::maps::{Claim, MapDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `Tr P = 1` (total trace over all blocks).
    #[default]
    TraceOne,
    /// `Φ(P) = I` for the map the density is used with.
    MapUnital,
}

/// Positive element with a checked normalization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityOperator {
    element: Element,
    normalization: Normalization,
}

impl DensityOperator {
    /// `map` is required for [`Normalization::MapUnital`] and ignored otherwise.
    pub fn new(
        element: Element,
        normalization: Normalization,
        map: Option<&MapDescriptor>,
        tol: &ToleranceConfig,
    ) -> Result<Self, UncertaintyError> {
        let check = is_positive(&element, tol);
        if !check.verdict {
            return Err(UncertaintyError::InvalidDensity(format!(
                "not positive (min eigenvalue {:.3e}, hermitian deviation {:.3e})",
                check.min_eig, check.herm_deviation
            )));
        }
        match normalization {
            Normalization::TraceOne => {
                let tr = element.trace();
                let slack = tol.psd_tol * (1.0 + element.shape().total_dimension() as f64);
                if (tr - C64::new(1.0, 0.0)).norm() > slack {
                    return Err(UncertaintyError::InvalidDensity(format!("trace is {tr}, expected 1")));
                }
            }
            Normalization::MapUnital => {
                let map = map.ok_or_else(|| {
                    UncertaintyError::InvalidDensity("map-unital normalization needs the map".into())
                })?;
                if map.arity() != 1 {
                    return Err(missing(map, "single-argument map"));
                }
                let image = map.evaluate(std::slice::from_ref(&element))?;
                let err = image.distance(&Element::identity(map.codomain_shape()))?;
                if err > tol.psd_tol * (1.0 + image.norm()) {
                    return Err(UncertaintyError::InvalidDensity(format!("‖Φ(P) − I‖ = {err:.3e}")));
                }
            }
        }
        Ok(Self { element, normalization })
    }

    pub fn element(&self) -> &Element {
        &self.element
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Eigenvalues of every block, clamped at zero.
    pub fn spectrum(&self) -> Vec<f64> {
        self.element.blocks().iter().flat_map(hermitian_eigenvalues).map(|x| x.max(0.0)).collect()
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Two real functions applied to a density by spectral calculus.
#[derive(Clone)]
pub struct SpectralFunctionPair {
    pub f: RealFn,
    pub g: RealFn,
    pub name: String,
    /// Verify `(f(x)−f(y))(g(x)−g(y)) ≥ 0` on the spectrum before use.
    pub same_monotonic_check: bool,
}

impl fmt::Debug for SpectralFunctionPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralFunctionPair")
            .field("name", &self.name)
            .field("same_monotonic_check", &self.same_monotonic_check)
            .finish_non_exhaustive()
    }
}

impl SpectralFunctionPair {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { f: Arc::new(f), g: Arc::new(g), name: name.into(), same_monotonic_check: true }
    }

    /// `f(t) = t^{1−α}`, `g(t) = t^α`.
    pub fn power_pair(alpha: f64) -> Self {
        Self::new(format!("power({alpha})"), move |t| t.powf(1.0 - alpha), move |t| t.powf(alpha))
    }

    pub fn identity_pair() -> Self {
        Self::new("identity", |t| t, |t| t)
    }

    /// Checks same monotonicity on every pair of spectrum points.
    pub fn check_same_monotonic(&self, rho: &DensityOperator) -> Result<(), UncertaintyError> {
        let pts = rho.spectrum();
        let fv: Vec<f64> = pts.iter().map(|&x| (self.f)(x)).collect();
        let gv: Vec<f64> = pts.iter().map(|&x| (self.g)(x)).collect();
        for p in 0..pts.len() {
            for q in p + 1..pts.len() {
                let prod = (fv[p] - fv[q]) * (gv[p] - gv[q]);
                let scale = 1.0 + fv[p].abs().max(fv[q].abs()) * gv[p].abs().max(gv[q].abs());
                if prod < -1e-12 * scale {
                    return Err(UncertaintyError::NotSameMonotonic { x: pts[p], y: pts[q] });
                }
            }
        }
        Ok(())
    }

    fn apply(&self, rho: &DensityOperator) -> Result<(Element, Element), UncertaintyError> {
        if self.same_monotonic_check {
            self.check_same_monotonic(rho)?;
        }
        let f = self.f.clone();
        let g = self.g.clone();
        Ok((
            apply_spectral_function(rho.element(), &move |t| f(t), true),
            apply_spectral_function(rho.element(), &move |t| g(t), true),
        ))
    }
}

fn single(map: &MapDescriptor) -> Result<(), UncertaintyError> {
    if map.arity() != 1 {
        return Err(missing(map, "single-argument map"));
    }
    Ok(())
}

fn sqrt_element(rho: &DensityOperator) -> Element {
    apply_spectral_function(rho.element(), &f64::sqrt, true)
}

fn inherited_claims(map: &MapDescriptor, rho: &DensityOperator, positivity: bool) -> Vec<Claim> {
    let mut claims: Vec<Claim> = Vec::new();
    if positivity {
        claims.extend(map.claims().iter().copied().filter(|c| {
            matches!(c, Claim::Positive | Claim::NPositive(_) | Claim::CompletelyPositive)
        }));
    }
    if rho.normalization() == Normalization::MapUnital {
        claims.push(Claim::Unital);
    }
    claims
}

/// `X ↦ Φ(P^{1/2} X P^{1/2})`; unital when `Φ(P) = I`.
pub fn sandwich_map(map: &MapDescriptor, rho: &DensityOperator) -> Result<MapDescriptor, UncertaintyError> {
    single(map)?;
    let root = sqrt_element(rho);
    let inner = map.clone();
    Ok(MapDescriptor::builder(
        format!("{}[P½·P½]", map.name()),
        map.domain_shapes().to_vec(),
        map.codomain_shape().clone(),
        move |args| inner.eval(&[&(&root * &args[0]) * &root]),
    )
    .linearity(map.linearity())
    .degree_bound(map.degree_bound())
    .claims(inherited_claims(map, rho, true))
    .build_unverified())
}

/// `X ↦ Φ(P X)`; unital when `Φ(P) = I`.
pub fn left_multiply_map(map: &MapDescriptor, rho: &DensityOperator) -> Result<MapDescriptor, UncertaintyError> {
    single(map)?;
    let p = rho.element().clone();
    let inner = map.clone();
    Ok(MapDescriptor::builder(
        format!("{}[P·]", map.name()),
        map.domain_shapes().to_vec(),
        map.codomain_shape().clone(),
        move |args| inner.eval(&[&p * &args[0]]),
    )
    .linearity(map.linearity())
    .degree_bound(map.degree_bound())
    .claims(inherited_claims(map, rho, false))
    .build_unverified())
}

/// `Φ(f(ϱ)g(ϱ)AB) − Φ(f(ϱ) A g(ϱ) B)`.
pub fn skew_correlation(
    map: &MapDescriptor,
    rho: &DensityOperator,
    pair: &SpectralFunctionPair,
    a: &Element,
    b: &Element,
) -> Result<Element, UncertaintyError> {
    single(map)?;
    let (f, g) = pair.apply(rho)?;
    let fg = &f * &g;
    let joint = map.evaluate(&[&fg * &(a * b)])?;
    let split = map.evaluate(&[&(&(&f * a) * &g) * b])?;
    Ok(&joint - &split)
}

/// `skew_correlation(A, A)`.
pub fn skew_information(
    map: &MapDescriptor,
    rho: &DensityOperator,
    pair: &SpectralFunctionPair,
    a: &Element,
) -> Result<Element, UncertaintyError> {
    skew_correlation(map, rho, pair, a, a)
}

/// `[[I(A), ⋆], [⋆, I(B)]]` with
/// `⋆ = Φ(½ f g {A,B}) − Φ((f A g B + f B g A)/2)`. Needs a tracial map with
/// the factorization property of order at least 4 and `Φ(0) = 0`.
pub fn skew_matrix(
    map: &MapDescriptor,
    rho: &DensityOperator,
    pair: &SpectralFunctionPair,
    a: &Element,
    b: &Element,
    tol: &ToleranceConfig,
) -> Result<Element, UncertaintyError> {
    single(map)?;
    if !map.has_claim(Claim::Tracial) {
        return Err(missing(map, "tracial"));
    }
    require_property_d(map, 4)?;
    require_zero_at_zero(map, tol)?;
    let (f, g) = pair.apply(rho)?;
    let fg = &f * &g;
    let jordan = &(a * b) + &(b * a);
    let cross = &(&(&(&f * a) * &g) * b) + &(&(&(&f * b) * &g) * a);
    let star = &map.evaluate(&[(&fg * &jordan).scale_real(0.5)])? - &map.evaluate(&[cross.scale_real(0.5)])?;
    let ia = skew_information(map, rho, pair, a)?;
    let ib = skew_information(map, rho, pair, b)?;
    Ok(block_matrix(&[vec![ia, star.clone()], vec![star, ib]])?)
}

pub fn skew_report(
    map: &MapDescriptor,
    rho: &DensityOperator,
    pair: &SpectralFunctionPair,
    a: &Element,
    b: &Element,
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    let m = skew_matrix(map, rho, pair, a, b, tol)?;
    Ok(InequalityReport::psd("skew_matrix", &m, tol, vec![rho.element().clone(), a.clone(), b.clone()]))
}

/// `Tr(ϱAB) − Tr(ϱ^{1−α} A ϱ^α B)` with the total trace.
pub fn classical_correlation(rho: &DensityOperator, alpha: f64, a: &Element, b: &Element) -> C64 {
    let left = apply_spectral_function(rho.element(), &|t| t.powf(1.0 - alpha), true);
    let right = apply_spectral_function(rho.element(), &|t| t.powf(alpha), true);
    (&rho.element().clone() * &(a * b)).trace() - (&(&(&left * a) * &right) * b).trace()
}
