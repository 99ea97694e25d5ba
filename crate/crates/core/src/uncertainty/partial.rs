use serde::{Deserialize, Serialize};

use super::{
    check_tuple, missing, pad, pad_zero, require_commutative, require_property_d, tuple_mul, variance,
    InequalityReport, UncertaintyError,
};
use crate::algebra::{block_matrix, is_positive, smallest_disk, AlgebraShape, Element, ToleranceConfig, C64};
use crate::maps::{Claim, Linearity, MapDescriptor};

fn check_slot(map: &MapDescriptor, i: usize) -> Result<(), UncertaintyError> {
    if i >= map.arity() {
        return Err(UncertaintyError::Index { index: i, arity: map.arity() });
    }
    Ok(())
}

fn check_element(map: &MapDescriptor, slot: usize, x: &Element) -> Result<(), UncertaintyError> {
    check_slot(map, slot)?;
    let expected = &map.domain_shapes()[slot];
    if x.shape() != expected {
        return Err(crate::maps::MapError::ArgumentShape { slot, expected: expected.clone(), found: x.shape().clone() }
            .into());
    }
    Ok(())
}

/// `Φ_(i)(X) = Φ(I, …, X, …, I)` with X in slot i (0-based).
pub fn slot_compress(map: &MapDescriptor, i: usize) -> Result<MapDescriptor, UncertaintyError> {
    check_slot(map, i)?;
    let inner = map.clone();
    let linearity = match map.linearity() {
        Linearity::Linear | Linearity::Multilinear => Linearity::Linear,
        other => other,
    };
    let inherited = map.claims().iter().copied().filter(|c| {
        matches!(c, Claim::Unital | Claim::Positive | Claim::NPositive(_) | Claim::CompletelyPositive)
    });
    Ok(MapDescriptor::builder(
        format!("{}_({i})", map.name()),
        vec![map.domain_shapes()[i].clone()],
        map.codomain_shape().clone(),
        move |args| {
            let mut t = inner.unit_args();
            t[i] = args[0].clone();
            inner.eval(&t)
        },
    )
    .linearity(linearity)
    .degree_bound(map.degree_bound())
    .claims(inherited)
    .population(map.population())
    .build_unverified())
}

/// `Φ(pad_i(X) · pad_j(Y))`; for `i = j` this is `Φ_(i)(XY)`.
fn pair_value(map: &MapDescriptor, i: usize, x: &Element, j: usize, y: &Element) -> Result<Element, UncertaintyError> {
    Ok(map.evaluate(&tuple_mul(&pad(map, i, x), &pad(map, j, y)))?)
}

/// Bilinear `Φ_(i,j)(X, Y) = Φ(pad_i(X) · pad_j(Y))` for two different slots.
pub fn slot_pair(map: &MapDescriptor, i: usize, j: usize) -> Result<MapDescriptor, UncertaintyError> {
    check_slot(map, i)?;
    check_slot(map, j)?;
    if i == j {
        return Err(UncertaintyError::SameSlot(i));
    }
    let inner = map.clone();
    let linearity = if map.is_linear() || map.linearity() == Linearity::Multilinear {
        Linearity::Multilinear
    } else {
        map.linearity()
    };
    Ok(MapDescriptor::builder(
        format!("{}_({i},{j})", map.name()),
        vec![map.domain_shapes()[i].clone(), map.domain_shapes()[j].clone()],
        map.codomain_shape().clone(),
        move |args| {
            let mut t = inner.unit_args();
            t[i] = args[0].clone();
            t[j] = args[1].clone();
            inner.eval(&t)
        },
    )
    .linearity(linearity)
    .degree_bound(map.degree_bound())
    .population(map.population())
    .build_unverified())
}

/// `Φ_(i,j)(X*, Y) − Φ_(i)(X*) Φ_(j)(Y)`.
fn partial_entry(map: &MapDescriptor, i: usize, x: &Element, j: usize, y: &Element) -> Result<Element, UncertaintyError> {
    let x_star = x.adjoint();
    let joint = pair_value(map, i, &x_star, j, y)?;
    let left = map.evaluate(&pad(map, i, &x_star))?;
    let right = map.evaluate(&pad(map, j, y))?;
    Ok(&joint - &(&left * &right))
}

/// Matrix of `partial_entry` over slot-labelled rows and columns.
fn partial_block(map: &MapDescriptor, rows: &[(usize, &Element)], cols: &[(usize, &Element)]) -> Result<Element, UncertaintyError> {
    let entries = rows
        .iter()
        .map(|&(i, x)| cols.iter().map(|&(j, y)| partial_entry(map, i, x, j, y)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(block_matrix(&entries)?)
}

fn labelled(a: &[Element]) -> Vec<(usize, &Element)> {
    a.iter().enumerate().collect()
}

/// k×k partial covariance `[Φ_(i,j)(Aᵢ*, Bⱼ) − Φ_(i)(Aᵢ*)Φ_(j)(Bⱼ)]`.
pub fn partial_covariance(map: &MapDescriptor, a: &[Element], b: &[Element]) -> Result<Element, UncertaintyError> {
    check_tuple(map, a)?;
    check_tuple(map, b)?;
    partial_block(map, &labelled(a), &labelled(b))
}

pub fn partial_variance(map: &MapDescriptor, a: &[Element]) -> Result<Element, UncertaintyError> {
    partial_covariance(map, a, a)
}

/// PSD check of the partial variance; needs (k+1)-positivity.
pub fn partial_variance_report(
    map: &MapDescriptor,
    a: &[Element],
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    let k = map.arity();
    if map.positivity_order() < k + 1 {
        return Err(missing(map, format!("n_positive({})", k + 1)));
    }
    let m = partial_variance(map, a)?;
    Ok(InequalityReport::psd("partial_variance", &m, tol, a.to_vec()))
}

/// 2k×2k matrix `[[ᵖVar A, ᵖCov(A,B)], [ᵖCov(B,A), ᵖVar B]]`; needs
/// (2k+1)-positivity. At k = 1 this is exactly [`super::vc_matrix`].
pub fn pvc_matrix(map: &MapDescriptor, a: &[Element], b: &[Element]) -> Result<Element, UncertaintyError> {
    let k = map.arity();
    if map.positivity_order() < 2 * k + 1 {
        return Err(missing(map, format!("n_positive({})", 2 * k + 1)));
    }
    check_tuple(map, a)?;
    check_tuple(map, b)?;
    let all: Vec<(usize, &Element)> = labelled(a).into_iter().chain(labelled(b)).collect();
    partial_block(map, &all, &all)
}

pub fn pvc_report(
    map: &MapDescriptor,
    a: &[Element],
    b: &[Element],
    tol: &ToleranceConfig,
) -> Result<InequalityReport, UncertaintyError> {
    let m = pvc_matrix(map, a, b)?;
    Ok(InequalityReport::psd("pvc_matrix", &m, tol, [a, b].concat()))
}

/// How the off-diagonal commutator entries of the composite matrix are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorMode {
    /// `Φ(½[𝐀, 𝐂])` with the tuple commutator, which is zero outside slot i.
    Nonlinear,
    /// `½ Φ_(i)([A, C])`; needs a multilinear map.
    Multilinear,
}

/// Self-adjoint A, C for slot i and B, D for slot j.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeInputs {
    pub i: usize,
    pub j: usize,
    pub a: Element,
    pub b: Element,
    pub c: Element,
    pub d: Element,
}

struct CompositeParts {
    vars: [Element; 4],
    /// `T_AC`, `T_BD`, `T_CA`, `T_DB`.
    comms: [Element; 4],
}

fn composite_parts(map: &MapDescriptor, inp: &CompositeInputs, mode: CommutatorMode) -> Result<CompositeParts, UncertaintyError> {
    require_property_d(map, usize::MAX)?;
    if inp.i == inp.j {
        return Err(UncertaintyError::SameSlot(inp.i));
    }
    for (slot, x) in [(inp.i, &inp.a), (inp.j, &inp.b), (inp.i, &inp.c), (inp.j, &inp.d)] {
        check_element(map, slot, x)?;
    }
    if mode == CommutatorMode::Multilinear && map.linearity() != Linearity::Multilinear && !map.is_linear() {
        return Err(missing(map, "multilinear"));
    }
    let half_comm = |slot: usize, x: &Element, y: &Element| -> Result<Element, UncertaintyError> {
        let c = &(x * y) - &(y * x);
        Ok(match mode {
            CommutatorMode::Nonlinear => map.evaluate(&pad_zero(map, slot, &c.scale_real(0.5)))?,
            CommutatorMode::Multilinear => map.evaluate(&pad(map, slot, &c))?.scale_real(0.5),
        })
    };
    let var = |slot: usize, x: &Element| variance(map, &pad(map, slot, x));
    Ok(CompositeParts {
        vars: [var(inp.i, &inp.a)?, var(inp.j, &inp.b)?, var(inp.i, &inp.c)?, var(inp.j, &inp.d)?],
        comms: [
            half_comm(inp.i, &inp.a, &inp.c)?,
            half_comm(inp.j, &inp.b, &inp.d)?,
            half_comm(inp.i, &inp.c, &inp.a)?,
            half_comm(inp.j, &inp.d, &inp.b)?,
        ],
    })
}

fn assemble_composite(p: &CompositeParts) -> Result<Element, UncertaintyError> {
    let z = Element::zeros(p.vars[0].shape());
    let [va, vb, vc, vd] = p.vars.clone();
    let [ac, bd, ca, db] = p.comms.clone();
    Ok(block_matrix(&[
        vec![va, z.clone(), ac, z.clone()],
        vec![z.clone(), vb, z.clone(), bd],
        vec![ca, z.clone(), vc, z.clone()],
        vec![z.clone(), db, z.clone(), vd],
    ])?)
}

/// 4×4 matrix with variances of 𝐀, 𝐁, 𝐂, 𝐃 on the diagonal and the halved
/// commutators `(𝐀,𝐂)`, `(𝐁,𝐃)` off it, for a map with the factorization
/// property of every order.
pub fn composite_matrix(
    map: &MapDescriptor,
    inputs: &CompositeInputs,
    mode: CommutatorMode,
) -> Result<Element, UncertaintyError> {
    assemble_composite(&composite_parts(map, inputs, mode)?)
}

/// Reports `composite_matrix` (PSD), `composite_norm_product`
/// (`Π‖Var‖ − (1/16)‖Φ[𝐀,𝐂]‖²‖Φ[𝐁,𝐃]‖²`) and, for a commutative range,
/// `composite_product` (the same inequality coordinatewise).
pub fn composite_report(
    map: &MapDescriptor,
    inputs: &CompositeInputs,
    mode: CommutatorMode,
    tol: &ToleranceConfig,
) -> Result<Vec<InequalityReport>, UncertaintyError> {
    let parts = composite_parts(map, inputs, mode)?;
    let w = vec![inputs.a.clone(), inputs.b.clone(), inputs.c.clone(), inputs.d.clone()];
    let m = assemble_composite(&parts)?;
    let mut out = vec![InequalityReport::psd("composite_matrix", &m, tol, w.clone())];
    // Φ([𝐀,𝐂]) = 2·T_AC
    let norms: Vec<f64> = parts.vars.iter().map(Element::norm).collect();
    let lhs: f64 = norms.iter().product();
    let (nac, nbd) = (2.0 * parts.comms[0].norm(), 2.0 * parts.comms[1].norm());
    let rhs = nac.powi(2) * nbd.powi(2) / 16.0;
    out.push(InequalityReport::new("composite_norm_product", lhs - rhs, tol.psd_tol * (1.0 + lhs + rhs), w.clone()));
    if map.codomain_shape().is_commutative() {
        let coords: Vec<Vec<C64>> = parts.vars.iter().map(Element::coords).collect();
        let (ac, bd) = (parts.comms[0].coords(), parts.comms[1].coords());
        let mut margin = f64::INFINITY;
        let mut scale = 0.0_f64;
        for p in 0..ac.len() {
            let l: f64 = coords.iter().map(|c| c[p].re).product();
            let r = (2.0 * ac[p].norm()).powi(2) * (2.0 * bd[p].norm()).powi(2) / 16.0;
            margin = margin.min(l - r);
            scale = scale.max(l.abs() + r);
        }
        out.push(InequalityReport::new("composite_product", margin, tol.psd_tol * (1.0 + scale), w));
    }
    Ok(out)
}

/// Observables for the composite-system bound on `𝒜 ⊗ ℬ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorInputs {
    pub left: AlgebraShape,
    pub right: AlgebraShape,
    pub a: Element,
    pub b: Element,
    pub c: Element,
    pub d: Element,
    /// Defaults to the center of the smallest disk containing spec(C).
    #[serde(default)]
    pub alpha: Option<C64>,
    /// Defaults to the center of the smallest disk containing spec(D).
    #[serde(default)]
    pub beta: Option<C64>,
}

/// For a unital CP linear map on `𝒜 ⊗ ℬ` with commutative range, the margin
/// of `Var(A⊗I)·Var(I⊗B) ≥ (1/16)|Φ([A,C]⊗I)·Φ(I⊗[B,D])|² / (‖C−αI‖‖D−βI‖)²`
/// per coordinate. When C and D are positive contractions a second report
/// checks `Var(A⊗I)·Var(I⊗B) ≥ |Φ([A,C]⊗I)|²·|Φ(I⊗[B,D])|²`.
pub fn tensor_uncertainty_bound(
    map: &MapDescriptor,
    inp: &TensorInputs,
    tol: &ToleranceConfig,
) -> Result<Vec<InequalityReport>, UncertaintyError> {
    require_commutative(map)?;
    if map.arity() != 1 || !map.is_linear() {
        return Err(missing(map, "linear single-argument map"));
    }
    if !map.has_claim(Claim::Unital) {
        return Err(missing(map, "unital"));
    }
    if map.positivity_order() != usize::MAX {
        return Err(missing(map, "completely_positive"));
    }
    let joint = inp.left.tensor(&inp.right);
    if map.domain_shapes()[0] != joint {
        return Err(UncertaintyError::InvalidInput(format!(
            "map domain {:?} is not the tensor product {:?}",
            map.domain_shapes()[0],
            joint
        )));
    }
    for (x, s, name) in [(&inp.a, &inp.left, "A"), (&inp.c, &inp.left, "C"), (&inp.b, &inp.right, "B"), (&inp.d, &inp.right, "D")] {
        if x.shape() != s {
            return Err(UncertaintyError::InvalidInput(format!("{name} has shape {:?}, expected {s:?}", x.shape())));
        }
    }
    let (il, ir) = (Element::identity(&inp.left), Element::identity(&inp.right));
    let alpha = match inp.alpha {
        Some(a) => a,
        None => smallest_disk(&inp.c, tol)?.center,
    };
    let beta = match inp.beta {
        Some(b) => b,
        None => smallest_disk(&inp.d, tol)?.center,
    };
    let nc = (&inp.c - &il.scale(alpha)).norm();
    let nd = (&inp.d - &ir.scale(beta)).norm();
    if nc <= tol.eq_tol || nd <= tol.eq_tol {
        return Err(UncertaintyError::DegenerateDenominator(format!("‖C−αI‖ = {nc:.3e}, ‖D−βI‖ = {nd:.3e}")));
    }
    let var_a = variance(map, &[inp.a.tensor(&ir)])?.coords();
    let var_b = variance(map, &[il.tensor(&inp.b)])?.coords();
    let comm_ac = map.evaluate(&[(&(&inp.a * &inp.c) - &(&inp.c * &inp.a)).tensor(&ir)])?.coords();
    let comm_bd = map.evaluate(&[il.tensor(&(&(&inp.b * &inp.d) - &(&inp.d * &inp.b)))])?.coords();
    let w = vec![inp.a.clone(), inp.b.clone(), inp.c.clone(), inp.d.clone()];
    let margin = |factor: f64| {
        let mut margin = f64::INFINITY;
        let mut scale = 0.0_f64;
        for p in 0..var_a.len() {
            let l = var_a[p].re * var_b[p].re;
            let r = factor * (comm_ac[p] * comm_bd[p]).norm_sqr();
            margin = margin.min(l - r);
            scale = scale.max(l.abs() + r);
        }
        (margin, tol.psd_tol * (1.0 + scale))
    };
    let (m, t) = margin(1.0 / (16.0 * (nc * nd).powi(2)));
    let mut out = vec![InequalityReport::new("tensor_bound", m, t, w.clone())];
    let contraction = |x: &Element| {
        is_positive(x, tol).verdict && is_positive(&(&Element::identity(x.shape()) - x), tol).verdict
    };
    if contraction(&inp.c) && contraction(&inp.d) {
        let (m, t) = margin(1.0);
        out.push(InequalityReport::new("tensor_bound_contraction", m, t, w));
    }
    Ok(out)
}
