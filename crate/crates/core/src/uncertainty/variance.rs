use super::{
    check_tuple, missing, pad, require_commutative, require_property_d, require_zero_at_zero, tuple_add,
    tuple_adjoint, tuple_mul, tuple_scale, tuple_sub, InequalityReport, UncertaintyError,
};
use crate::algebra::{block_matrix, min_eigenvalue, smallest_disk_radius, Element, ToleranceConfig};
use crate::maps::{Claim, MapDescriptor};

/// `Cov_Φ(A, B) = Φ(A*B) − Φ(A*)Φ(B)`.
pub fn covariance(map: &MapDescriptor, a: &[Element], b: &[Element]) -> Result<Element, UncertaintyError> {
    check_tuple(map, a)?;
    check_tuple(map, b)?;
    let a_star = tuple_adjoint(a);
    let joint = map.evaluate(&tuple_mul(&a_star, b))?;
    Ok(&joint - &(&map.evaluate(&a_star)? * &map.evaluate(b)?))
}

/// `Var_Φ(A) = Cov_Φ(A, A)`.
pub fn variance(map: &MapDescriptor, a: &[Element]) -> Result<Element, UncertaintyError> {
    covariance(map, a, a)
}

/// `[[Var A, Cov(A,B)], [Cov(B,A), Var B]]` without checking any property.
pub fn assemble_vc_matrix(map: &MapDescriptor, a: &[Element], b: &[Element]) -> Result<Element, UncertaintyError> {
    Ok(block_matrix(&[
        vec![variance(map, a)?, covariance(map, a, b)?],
        vec![covariance(map, b, a)?, variance(map, b)?],
    ])?)
}

/// Variance-covariance matrix of a unital 3-positive map.
pub fn vc_matrix(map: &MapDescriptor, a: &[Element], b: &[Element]) -> Result<Element, UncertaintyError> {
    if !map.has_claim(Claim::Unital) {
        return Err(missing(map, "unital"));
    }
    if map.positivity_order() < 3 {
        return Err(missing(map, "n_positive(3)"));
    }
    assemble_vc_matrix(map, a, b)
}

pub fn vc_report(
    map: &MapDescriptor,
    a: &[Element],
    b: &[Element],
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    let m = vc_matrix(map, a, b)?;
    Ok(InequalityReport::psd("vc_matrix", &m, tol, [a, b].concat()))
}

fn commutator(a: &[Element], b: &[Element]) -> Vec<Element> {
    tuple_sub(&tuple_mul(a, b), &tuple_mul(b, a))
}

fn anticommutator(a: &[Element], b: &[Element]) -> Vec<Element> {
    tuple_add(&tuple_mul(a, b), &tuple_mul(b, a))
}

/// Coordinatewise `Var A · Var B − (Re Cov(A,B))² − ¼|Φ([A,B])|²` for a
/// unital linear map with commutative range.
pub fn schrodinger_margin(
    map: &MapDescriptor,
    a: &[Element],
    b: &[Element],
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    require_commutative(map)?;
    if !map.is_linear() {
        return Err(missing(map, "linear"));
    }
    if !map.has_claim(Claim::Unital) {
        return Err(missing(map, "unital"));
    }
    let va = variance(map, a)?.coords();
    let vb = variance(map, b)?.coords();
    let cov = covariance(map, a, b)?.coords();
    let comm = map.evaluate(&commutator(a, b))?.coords();
    let mut margin = f64::INFINITY;
    let mut scale = 0.0_f64;
    for j in 0..va.len() {
        let lhs = va[j].re * vb[j].re;
        margin = margin.min(lhs - cov[j].re.powi(2) - 0.25 * comm[j].norm_sqr());
        scale = scale.max(lhs.abs());
    }
    Ok(InequalityReport::new("schrodinger", margin, tol.psd_tol * (1.0 + scale), [a, b].concat()))
}

/// Margin of the operator inequality `lhs ⪰ rhs`.
fn operator_margin(quantity: &str, lhs: &Element, rhs: &Element, tol: &ToleranceConfig, w: Vec<Element>) -> InequalityReport {
    let diff = lhs - rhs;
    let scale = 1.0 + lhs.norm() + rhs.norm();
    InequalityReport::new(quantity, min_eigenvalue(&diff), tol.psd_tol * scale, w)
}

/// Uncertainty relations for a map `φ₂ ∘ φ₁` factoring through a
/// commutative algebra with `Φ(0) = 0`:
///
/// * `heisenberg_i`: the variance-covariance matrix;
/// * `heisenberg_ii`: `[[Var A, Φ(½[A,B])], [Φ(½[B,A]), Var B]]`;
/// * `heisenberg_iii_a`/`_b`: `‖Var A‖ Var B` and `‖Var B‖ Var A` minus
///   `T*T` with `T = Φ(½[A,B])`; the `_alt` variants subtract `TT*`;
/// * `commutative_product` (commutative range): `Var A · Var B − |T|²`;
/// * `heisenberg_iv` (order at least 4): the matrix with off-diagonal
///   entries `Φ(½{A,B}) − Φ(A)Φ(B)` and `Φ(½{A,B}) − Φ(B)Φ(A)`.
pub fn heisenberg_suite(
    map: &MapDescriptor,
    a: &[Element],
    b: &[Element],
    tol: &ToleranceConfig,
) -> Result<Vec<InequalityReport>, UncertaintyError> {
    require_property_d(map, 3)?;
    require_zero_at_zero(map, tol)?;
    let w: Vec<Element> = [a, b].concat();
    let va = variance(map, a)?;
    let vb = variance(map, b)?;
    let t = map.evaluate(&tuple_scale(&commutator(a, b), 0.5))?;
    let t_rev = map.evaluate(&tuple_scale(&commutator(b, a), 0.5))?;
    let mut out = vec![
        InequalityReport::psd("heisenberg_i", &assemble_vc_matrix(map, a, b)?, tol, w.clone()),
        InequalityReport::psd(
            "heisenberg_ii",
            &block_matrix(&[vec![va.clone(), t.clone()], vec![t_rev, vb.clone()]])?,
            tol,
            w.clone(),
        ),
    ];
    let tt = &t.adjoint() * &t;
    let tt_alt = &t * &t.adjoint();
    let (na, nb) = (va.norm(), vb.norm());
    out.push(operator_margin("heisenberg_iii_a", &vb.scale_real(na), &tt, tol, w.clone()));
    out.push(operator_margin("heisenberg_iii_b", &va.scale_real(nb), &tt, tol, w.clone()));
    out.push(operator_margin("heisenberg_iii_a_alt", &vb.scale_real(na), &tt_alt, tol, w.clone()));
    out.push(operator_margin("heisenberg_iii_b_alt", &va.scale_real(nb), &tt_alt, tol, w.clone()));
    if map.codomain_shape().is_commutative() {
        out.push(operator_margin("commutative_product", &(&va * &vb), &tt, tol, w.clone()));
    }
    if map.property_d_order().is_some_and(|m| m >= 4) {
        let jordan = map.evaluate(&tuple_scale(&anticommutator(a, b), 0.5))?;
        let (fa, fb) = (map.evaluate(a)?, map.evaluate(b)?);
        let m = block_matrix(&[
            vec![va, &jordan - &(&fa * &fb)],
            vec![&jordan - &(&fb * &fa), vb],
        ])?;
        out.push(InequalityReport::psd("heisenberg_iv", &m, tol, w));
    }
    Ok(out)
}

/// `Var_Φ(X) ⪯ r²·I` with r the radius of the smallest disk containing the
/// spectrum of the normal element X, for a unital positive linear map.
pub fn variance_upper_bound(
    map: &MapDescriptor,
    x: &Element,
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    if map.arity() != 1 || !map.is_linear() {
        return Err(missing(map, "linear single-argument map"));
    }
    if !map.has_claim(Claim::Unital) {
        return Err(missing(map, "unital"));
    }
    if map.positivity_order() < 1 {
        return Err(missing(map, "positive"));
    }
    let r = smallest_disk_radius(x, tol)?;
    let var = variance(map, std::slice::from_ref(x))?;
    let bound = Element::identity(map.codomain_shape()).scale_real(r * r);
    Ok(operator_margin("variance_upper_bound", &bound, &var, tol, vec![x.clone()]))
}

/// The same bound for `X` placed in one slot of a unital positive multimap,
/// with the other slots at the identity.
pub fn slot_variance_upper_bound(
    map: &MapDescriptor,
    slot: usize,
    x: &Element,
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    if !map.has_claim(Claim::Unital) {
        return Err(missing(map, "unital"));
    }
    if map.positivity_order() < 1 {
        return Err(missing(map, "positive"));
    }
    if slot >= map.arity() {
        return Err(UncertaintyError::Index { index: slot, arity: map.arity() });
    }
    let r = smallest_disk_radius(x, tol)?;
    let var = variance(map, &pad(map, slot, x))?;
    let bound = Element::identity(map.codomain_shape()).scale_real(r * r);
    let mut report = operator_margin("slot_variance_upper_bound", &bound, &var, tol, vec![x.clone()]);
    report.quantity = format!("slot_variance_upper_bound({slot})");
    Ok(report)
}

/// `Var_{φ∘ψ}(X) − φ(Var_ψ(X)) ⪰ 0`.
pub fn variance_domination(
    psi: &MapDescriptor,
    phi: &MapDescriptor,
    x: &[Element],
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    check_tuple(psi, x)?;
    let x_star = tuple_adjoint(x);
    let inner_sq = psi.evaluate(&tuple_mul(&x_star, x))?;
    let (inner_adj, inner) = (psi.evaluate(&x_star)?, psi.evaluate(x)?);
    let composed_var = &phi.evaluate(std::slice::from_ref(&inner_sq))? - &(&phi.evaluate(std::slice::from_ref(&inner_adj))? * &phi.evaluate(std::slice::from_ref(&inner))?);
    let pushed = phi.evaluate(&[&inner_sq - &(&inner_adj * &inner)])?;
    Ok(operator_margin("variance_domination", &composed_var, &pushed, tol, x.to_vec()))
}
