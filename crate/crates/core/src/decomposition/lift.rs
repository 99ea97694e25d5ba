use std::f64::consts::PI;

use super::{DecompositionError, MAX_LIFT_DEGREE};
use crate::algebra::{Element, C64};
use crate::maps::{Linearity, MapDescriptor, MapError};

const DIAGONAL_TOL: f64 = 1e-8;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficient of `s₁⋯s_m t̄₁⋯t̄_n` in `Φ_{m,n}(Σ sᵢAᵢ + Σ t_l conj(C_l))`,
/// divided by `m!n!`. Phases run over `2(m+n)+1` points per variable.
pub(crate) fn lift_unchecked(
    component: &MapDescriptor,
    m: usize,
    n: usize,
    holomorphic: &[Element],
    antiholomorphic: &[Element],
) -> Element {
    let bs: Vec<Element> = antiholomorphic.iter().map(Element::conj).collect();
    let vars: Vec<&Element> = holomorphic.iter().chain(&bs).collect();
    let v = m + n;
    if v == 1 {
        return component.eval(&[vars[0].clone()]);
    }
    let grid = 2 * v + 1;
    let total = grid.pow(v as u32);
    let zero = Element::zeros(component.codomain_shape());
    let mut acc = zero.clone();
    for idx in 0..total {
        let mut rest = idx;
        let mut x = Element::zeros(vars[0].shape());
        let mut weight = C64::new(1.0, 0.0);
        for (i, a) in vars.iter().enumerate() {
            let k = rest % grid;
            rest /= grid;
            let phase = C64::from_polar(1.0, 2.0 * PI * k as f64 / grid as f64);
            x = &x + &a.scale(phase);
            // Holomorphic variables carry net exponent +1, the others −1.
            weight *= if i < m { phase.conj() } else { phase };
        }
        acc = &acc + &component.eval(&[x]).scale(weight);
    }
    acc.scale_real(1.0 / (total as f64 * factorial(m) * factorial(n)))
}

/// Symmetric multilinear form `Φ^{(m,n)}` of an (m,n)-homogeneous map, at
/// `A₁,…,A_m ∈ 𝒜` and `C₁,…,C_n` in the conjugate algebra (entrywise
/// conjugate blocks), so that `Φ^{(m,n)}(A,…,A, Ā,…,Ā) = Φ_{m,n}(A)`. That
/// identity is re-checked on the first argument at every call.
pub fn multilinear_lift(
    component: &MapDescriptor,
    holomorphic: &[Element],
    antiholomorphic: &[Element],
) -> Result<Element, DecompositionError> {
    let Linearity::MixedHomogeneous { m, n } = component.linearity() else {
        return Err(DecompositionError::Unsupported("lift needs a mixed-homogeneous component".into()));
    };
    if m + n > MAX_LIFT_DEGREE {
        return Err(DecompositionError::PolarizationOrder { m, n });
    }
    if holomorphic.len() != m || antiholomorphic.len() != n {
        return Err(MapError::Arity { expected: m + n, found: holomorphic.len() + antiholomorphic.len() }.into());
    }
    let shape = &component.domain_shapes()[0];
    for (slot, a) in holomorphic.iter().chain(antiholomorphic).enumerate() {
        if a.shape() != shape {
            return Err(
                MapError::ArgumentShape { slot, expected: shape.clone(), found: a.shape().clone() }.into()
            );
        }
    }
    if m + n == 0 {
        return Ok(component.evaluate(&[Element::zeros(shape)])?);
    }
    let value = lift_unchecked(component, m, n, holomorphic, antiholomorphic);
    let a = holomorphic.first().cloned().unwrap_or_else(|| antiholomorphic[0].conj());
    let hol = vec![a.clone(); m];
    let anti = vec![a.conj(); n];
    let diagonal = lift_unchecked(component, m, n, &hol, &anti);
    let direct = component.evaluate(&[a])?;
    let error = diagonal.distance(&direct)? / (1.0 + direct.norm());
    if error > DIAGONAL_TOL {
        return Err(DecompositionError::InconsistentDiagonal { m, n, error });
    }
    Ok(value)
}
