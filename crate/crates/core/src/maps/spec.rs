use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::descriptor::{Claim, Linearity, MapBuilder, MapDescriptor, StoredWitness};
use super::{KrausSet, MapError, Notion};
use crate::algebra::{
    is_positive, matrix_from_json, matrix_to_json, AlgebraShape, CMatrix, Element, ToleranceConfig, C64,
};
use crate::random::Population;

/// Rectangular complex matrix in the row-major `[[ [re,im], ... ], ...]` format.
#[derive(Clone, Debug, PartialEq)]
pub struct JsonMatrix(pub CMatrix);

impl Serialize for JsonMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for JsonMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        matrix_from_json(&rows).map(JsonMatrix).map_err(serde::de::Error::custom)
    }
}

/// One term `(∏_l tr A^l_{b_l}) · P` of a product-of-block-traces map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceTerm {
    pub blocks: Vec<usize>,
    pub coefficient: Element,
}

/// One term `(∏_j c_j^{a_j} c̄_j^{b_j}) · P` of a map on `C^p`. Missing
/// exponents count as zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    #[serde(default)]
    pub holomorphic: Vec<u32>,
    #[serde(default)]
    pub antiholomorphic: Vec<u32>,
    pub coefficient: Element,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Letter {
    A,
    AStar,
    Const(Element),
}

/// `coefficient · L_1 L_2 ⋯` with letters A, A* or fixed elements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordTerm {
    pub coefficient: [f64; 2],
    pub letters: Vec<Letter>,
}

/// Serializable description of a map. `build` turns it into a registered
/// [`MapDescriptor`] with claims derived from the structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum MapSpec {
    /// `X ↦ Σ V_r X V_r*`.
    Kraus { operators: Vec<JsonMatrix> },
    /// `⊕M_i ↦ Σ tr(M_i) P_i`.
    TracialLinear { domain: AlgebraShape, coefficients: Vec<Element> },
    /// `Σ_j (∏_l tr A^l_{b_l(j)}) P_j`.
    TracialMultilinear { domains: Vec<AlgebraShape>, terms: Vec<TraceTerm> },
    /// `V*(A_1 ⊗ ⋯ ⊗ A_k)V`.
    CpMultilinear { dims: Vec<usize>, isometry: JsonMatrix },
    Tensor { domains: Vec<AlgebraShape> },
    /// `A_1 A_2 ⋯ A_k`.
    Product { shape: AlgebraShape, arity: usize },
    /// Blockwise Schur product of entrywise powers `|x|^{α_i}` (`|x|^{2α_i}`
    /// when `conjugate`).
    HadamardPower {
        shape: AlgebraShape,
        exponents: Vec<f64>,
        #[serde(default)]
        conjugate: bool,
    },
    /// `(A, B) ↦ Aᵀ ⊗ Bᵀ`.
    TransposeTensor { shape: AlgebraShape },
    /// `outer ∘ inner`.
    Composite { inner: Box<MapSpec>, outer: Box<MapSpec> },
    Transpose { shape: AlgebraShape },
    Identity { shape: AlgebraShape },
    /// `(A_1, …, A_k) ↦ (A_1, …, A_{k−1})`.
    Projection { shape: AlgebraShape, arity: usize },
    /// Blockwise Schur product of k arguments.
    HadamardProduct { shape: AlgebraShape, arity: usize },
    /// `X ↦ ‖X‖`.
    OperatorNorm { shape: AlgebraShape },
    /// Slot i contributes the coordinates `tr(ρ A_i)` for each of its states.
    StateBundle { slots: Vec<Vec<Element>> },
    /// Polynomial map on `C^coords`.
    Monomial { coords: usize, terms: Vec<MonomialTerm> },
    /// Normalized block traces as coordinates of `C^p`.
    CenterTrace { shape: AlgebraShape },
    /// `copies` repetitions of the center coordinates of A followed by the
    /// same number of repetitions for the conjugate of A.
    CenterBundle { shape: AlgebraShape, copies: usize },
    /// A map on a direct sum, restricted to block-scalar arguments and read as
    /// a map on the coordinate algebra.
    CenterRestriction { map: Box<MapSpec>, slots: Vec<AlgebraShape> },
    /// Normalized block traces of every slot, concatenated.
    SlotCenterTrace { slots: Vec<AlgebraShape> },
    /// Sum of polarized homogeneous components restricted to center bundles.
    NonlinearCenterLift { map: Box<MapSpec>, shape: AlgebraShape, degree: usize },
    WordPolynomial { shape: AlgebraShape, terms: Vec<WordTerm> },
}

/// A spec plus extra claims to verify at registration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    #[serde(flatten)]
    pub spec: MapSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<Claim>,
}

impl MapDocument {
    pub fn build(&self) -> Result<MapDescriptor, MapError> {
        self.spec.builder()?.claims(self.claims.iter().copied()).register()
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, MapError> {
    Err(MapError::InvalidSpec(msg.into()))
}

fn all_positive(elems: &[&Element]) -> bool {
    let tol = ToleranceConfig::default();
    elems.iter().all(|e| is_positive(e, &tol).verdict)
}

fn is_identity(x: &Element) -> bool {
    x.distance(&Element::identity(x.shape())).map(|d| d <= 1e-10).unwrap_or(false)
}

fn common_shape(elems: &[&Element]) -> Result<AlgebraShape, MapError> {
    let Some(first) = elems.first() else { return invalid("at least one coefficient is required") };
    if elems.iter().any(|e| e.shape() != first.shape()) {
        return invalid("coefficients must share one shape");
    }
    Ok(first.shape().clone())
}

fn positivity_claims(order: usize) -> Vec<Claim> {
    match order {
        0 => vec![],
        1 => vec![Claim::Positive],
        usize::MAX => vec![Claim::Positive, Claim::CompletelyPositive],
        n => vec![Claim::Positive, Claim::NPositive(n)],
    }
}

fn degree_of(map: &MapDescriptor) -> Option<usize> {
    match map.linearity() {
        Linearity::Linear => Some(1),
        Linearity::Multilinear => Some(map.arity()),
        Linearity::MixedHomogeneous { m, n } => Some(m + n),
        Linearity::Polynomial { degree } => Some(degree),
        Linearity::Opaque => None,
    }
}

fn entry_power(z: C64, alpha: f64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(if alpha == 0.0 { 1.0 } else { 0.0 }, 0.0)
    } else {
        C64::new(r.powf(alpha), 0.0)
    }
}

/// Deterministic PSD inputs `11ᵀ + ε x xᵀ` (x equispaced in [0,1]) on which
/// entrywise non-integer powers below the threshold lose positivity.
pub fn fitzgerald_probes(shape: &AlgebraShape, n: usize) -> Vec<Element> {
    [0.05, 0.1, 0.2]
        .iter()
        .map(|&eps| {
            let blocks = shape
                .dims()
                .iter()
                .map(|&d| {
                    let size = n * d;
                    let x = |i: usize| if size > 1 { i as f64 / (size - 1) as f64 } else { 0.0 };
                    CMatrix::from_fn(size, size, |i, j| C64::new(1.0 + eps * x(i) * x(j), 0.0))
                })
                .collect();
            Element::new(shape.amplified(n), blocks).expect("probe matches amplified shape")
        })
        .collect()
}

fn monomial_value(coords: &[C64], term: &MonomialTerm) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for (j, c) in coords.iter().enumerate() {
        if let Some(&a) = term.holomorphic.get(j) {
            v *= c.powu(a);
        }
        if let Some(&b) = term.antiholomorphic.get(j) {
            v *= c.conj().powu(b);
        }
    }
    v
}

fn term_bidegree(term: &MonomialTerm) -> (usize, usize) {
    (
        term.holomorphic.iter().map(|&a| a as usize).sum(),
        term.antiholomorphic.iter().map(|&b| b as usize).sum(),
    )
}

fn bidegree_linearity(degrees: &[(usize, usize)]) -> Linearity {
    let first = degrees[0];
    if degrees.iter().all(|&d| d == (1, 0)) {
        Linearity::Linear
    } else if degrees.iter().all(|&d| d == first) {
        Linearity::MixedHomogeneous { m: first.0, n: first.1 }
    } else {
        Linearity::Polynomial { degree: degrees.iter().map(|d| d.0 + d.1).max().unwrap_or(0) }
    }
}

impl MapSpec {
    /// Builds and registers the described map.
    pub fn build(&self) -> Result<MapDescriptor, MapError> {
        self.builder()?.register()
    }

    /// Builder with derived linearity and claims, not yet registered.
    pub fn builder(&self) -> Result<MapBuilder, MapError> {
        Ok(self.raw_builder()?.spec(self.clone()))
    }

    fn raw_builder(&self) -> Result<MapBuilder, MapError> {
        match self {
            MapSpec::Kraus { operators } => {
                let kraus = KrausSet::new(operators.iter().map(|m| m.0.clone()).collect())?;
                let unital = kraus.is_unital(1e-10);
                let dom = AlgebraShape::square(kraus.domain_dim());
                let cod = AlgebraShape::square(kraus.codomain_dim());
                let b = MapDescriptor::builder("kraus", vec![dom], cod, move |args| {
                    Element::from_matrix(kraus.apply(args[0].block(0))).expect("square output")
                })
                .linearity(Linearity::Linear)
                .claims([Claim::Positive, Claim::CompletelyPositive]);
                Ok(if unital { b.claim(Claim::Unital) } else { b })
            }
            MapSpec::TracialLinear { domain, coefficients } => {
                if coefficients.len() != domain.block_count() {
                    return invalid("one coefficient per domain block is required");
                }
                let refs: Vec<&Element> = coefficients.iter().collect();
                let cod = common_shape(&refs)?;
                let mut unit = Element::zeros(&cod);
                for (p, &d) in coefficients.iter().zip(domain.dims()) {
                    unit = &unit + &p.scale_real(d as f64);
                }
                let cp = all_positive(&refs);
                let coeffs = coefficients.clone();
                let cod2 = cod.clone();
                let mut b = MapDescriptor::builder("tracial_linear", vec![domain.clone()], cod, move |args| {
                    let mut out = Element::zeros(&cod2);
                    for (t, p) in args[0].block_traces().iter().zip(&coeffs) {
                        out = &out + &p.scale(*t);
                    }
                    out
                })
                .linearity(Linearity::Linear)
                .claim(Claim::Tracial);
                if cp {
                    b = b.claims(positivity_claims(usize::MAX));
                }
                if is_identity(&unit) {
                    b = b.claim(Claim::Unital);
                }
                Ok(b)
            }
            MapSpec::TracialMultilinear { domains, terms } => {
                if domains.is_empty() {
                    return invalid("at least one slot is required");
                }
                for t in terms {
                    if t.blocks.len() != domains.len()
                        || t.blocks.iter().zip(domains).any(|(&b, s)| b >= s.block_count())
                    {
                        return invalid("each term needs one valid block index per slot");
                    }
                }
                let refs: Vec<&Element> = terms.iter().map(|t| &t.coefficient).collect();
                let cod = common_shape(&refs)?;
                let cp = all_positive(&refs);
                let terms2 = terms.clone();
                let cod2 = cod.clone();
                let eval = move |args: &[Element]| {
                    let mut out = Element::zeros(&cod2);
                    for t in &terms2 {
                        let f: C64 = t.blocks.iter().zip(args).map(|(&b, a)| a.block(b).trace()).product();
                        out = &out + &t.coefficient.scale(f);
                    }
                    out
                };
                let unit_value = eval(&domains.iter().map(Element::identity).collect::<Vec<_>>());
                let mut b = MapDescriptor::builder("tracial_multilinear", domains.clone(), cod, eval)
                    .linearity(Linearity::Multilinear)
                    .claim(Claim::Tracial);
                if cp {
                    b = b.claims(positivity_claims(usize::MAX));
                }
                if is_identity(&unit_value) {
                    b = b.claim(Claim::Unital);
                }
                Ok(b)
            }
            MapSpec::CpMultilinear { dims, isometry } => {
                let v = isometry.0.clone();
                let rows: usize = dims.iter().product();
                if dims.is_empty() || dims.contains(&0) || v.nrows() != rows {
                    return invalid(format!("isometry needs {rows} rows for dims {dims:?}"));
                }
                let out = v.ncols();
                let unital = (v.adjoint() * &v - CMatrix::identity(out, out)).norm() <= 1e-10;
                let domains = dims.iter().map(|&d| AlgebraShape::square(d)).collect();
                let b = MapDescriptor::builder("cp_multilinear", domains, AlgebraShape::square(out), move |args| {
                    let mut t = args[0].block(0).clone();
                    for a in &args[1..] {
                        t = t.kronecker(a.block(0));
                    }
                    Element::from_matrix(v.adjoint() * t * &v).expect("square output")
                })
                .linearity(Linearity::Multilinear)
                .claims(positivity_claims(usize::MAX));
                Ok(if unital { b.claim(Claim::Unital) } else { b })
            }
            MapSpec::Tensor { domains } => {
                let Some(first) = domains.first() else { return invalid("tensor needs a slot") };
                let cod = domains[1..].iter().fold(first.clone(), |acc, s| acc.tensor(s));
                Ok(MapDescriptor::builder("tensor", domains.clone(), cod, |args| {
                    args[1..].iter().fold(args[0].clone(), |acc, a| acc.tensor(a))
                })
                .linearity(Linearity::Multilinear)
                .claims(positivity_claims(usize::MAX))
                .claim(Claim::Unital))
            }
            MapSpec::Product { shape, arity } => {
                if *arity == 0 {
                    return invalid("product needs a slot");
                }
                let b = MapDescriptor::builder("product", vec![shape.clone(); *arity], shape.clone(), |args| {
                    args[1..].iter().fold(args[0].clone(), |acc, a| &acc * a)
                })
                .linearity(Linearity::Multilinear)
                .claim(Claim::Unital);
                Ok(if shape.is_commutative() { b.claims(positivity_claims(usize::MAX)) } else { b })
            }
            MapSpec::HadamardPower { shape, exponents, conjugate } => {
                if exponents.is_empty() || exponents.iter().any(|a| !a.is_finite() || *a < 0.0) {
                    return invalid("exponents must be nonnegative and finite");
                }
                let factor = if *conjugate { 2.0 } else { 1.0 };
                let alphas: Vec<f64> = exponents.iter().map(|a| a * factor).collect();
                let k = alphas.len();
                let mut b = MapDescriptor::builder("hadamard_power", vec![shape.clone(); k], shape.clone(), move |args| {
                    let blocks = (0..args[0].shape().block_count())
                        .map(|bi| {
                            let mut m = args[0].block(bi).map(|z| entry_power(z, alphas[0]));
                            for (a, &al) in args[1..].iter().zip(&alphas[1..]) {
                                m = m.component_mul(&a.block(bi).map(|z| entry_power(z, al)));
                            }
                            m
                        })
                        .collect();
                    Element::new(args[0].shape().clone(), blocks).expect("shape preserved")
                })
                .linearity(Linearity::Opaque)
                .population(if *conjugate { Population::Complex } else { Population::Real });
                if k == 1 {
                    for n in 1..=3 {
                        for p in fitzgerald_probes(shape, n) {
                            b = b.witness(StoredWitness { notion: Notion::Type2(n), args: vec![p] });
                        }
                    }
                }
                Ok(b)
            }
            MapSpec::TransposeTensor { shape } => {
                let cod = shape.tensor(shape);
                Ok(MapDescriptor::builder("transpose_tensor", vec![shape.clone(), shape.clone()], cod, |args| {
                    args[0].transpose().tensor(&args[1].transpose())
                })
                .linearity(Linearity::Multilinear)
                .claims([Claim::Positive, Claim::Unital]))
            }
            MapSpec::Composite { inner, outer } => composite_builder(inner, outer),
            MapSpec::Transpose { shape } => Ok(MapDescriptor::builder("transpose", vec![shape.clone()], shape.clone(), |args| {
                args[0].transpose()
            })
            .linearity(Linearity::Linear)
            .claims([Claim::Positive, Claim::Unital])),
            MapSpec::Identity { shape } => Ok(MapDescriptor::builder("identity", vec![shape.clone()], shape.clone(), |args| {
                args[0].clone()
            })
            .linearity(Linearity::Linear)
            .claims(positivity_claims(usize::MAX))
            .claim(Claim::Unital)),
            MapSpec::Projection { shape, arity } => {
                if *arity < 2 {
                    return invalid("projection needs at least two slots");
                }
                let cod = AlgebraShape::direct_sum(&vec![shape.clone(); arity - 1])?;
                Ok(MapDescriptor::builder("projection", vec![shape.clone(); *arity], cod, |args| {
                    Element::direct_sum(&args[..args.len() - 1]).expect("uniform shapes")
                })
                .linearity(Linearity::Linear)
                .claims(positivity_claims(usize::MAX))
                .claim(Claim::Unital))
            }
            MapSpec::HadamardProduct { shape, arity } => {
                if *arity == 0 {
                    return invalid("Schur product needs a slot");
                }
                Ok(MapDescriptor::builder("hadamard_product", vec![shape.clone(); *arity], shape.clone(), |args| {
                    args[1..].iter().fold(args[0].clone(), |acc, a| acc.schur(a).expect("uniform shapes"))
                })
                .linearity(Linearity::Multilinear)
                .claims(positivity_claims(usize::MAX))
                .claim(Claim::Unital))
            }
            MapSpec::OperatorNorm { shape } => Ok(MapDescriptor::builder(
                "operator_norm",
                vec![shape.clone()],
                AlgebraShape::commutative(1),
                |args| Element::diagonal_coords(&[C64::new(args[0].norm(), 0.0)]),
            )
            .claims([Claim::Positive, Claim::NPositive(2)])),
            MapSpec::StateBundle { slots } => {
                if slots.is_empty() || slots.iter().any(|s| s.is_empty()) {
                    return invalid("every slot needs at least one state");
                }
                let mut domains = Vec::new();
                for s in slots {
                    let refs: Vec<&Element> = s.iter().collect();
                    domains.push(common_shape(&refs)?);
                }
                let all: Vec<&Element> = slots.iter().flatten().collect();
                let cp = all_positive(&all);
                let unital = all.iter().all(|r| (r.trace() - C64::new(1.0, 0.0)).norm() <= 1e-10);
                let states = slots.clone();
                let count = all.len();
                let mut b = MapDescriptor::builder("state_bundle", domains, AlgebraShape::commutative(count), move |args| {
                    let coords: Vec<C64> = states
                        .iter()
                        .zip(args)
                        .flat_map(|(s, a)| s.iter().map(move |rho| (rho * a).trace()))
                        .collect();
                    Element::diagonal_coords(&coords)
                })
                .linearity(Linearity::Linear);
                if cp {
                    b = b.claims(positivity_claims(usize::MAX));
                }
                if unital {
                    b = b.claim(Claim::Unital);
                }
                Ok(b)
            }
            MapSpec::Monomial { coords, terms } => {
                if *coords == 0 || terms.is_empty() {
                    return invalid("monomial maps need coordinates and terms");
                }
                if terms.iter().any(|t| t.holomorphic.len() > *coords || t.antiholomorphic.len() > *coords) {
                    return invalid("exponent vector longer than the coordinate count");
                }
                let refs: Vec<&Element> = terms.iter().map(|t| &t.coefficient).collect();
                let cod = common_shape(&refs)?;
                let cp = all_positive(&refs);
                let degrees: Vec<(usize, usize)> = terms.iter().map(term_bidegree).collect();
                let linearity = bidegree_linearity(&degrees);
                let terms2 = terms.clone();
                let cod2 = cod.clone();
                let eval = move |args: &[Element]| {
                    let c = args[0].coords();
                    let mut out = Element::zeros(&cod2);
                    for t in &terms2 {
                        out = &out + &t.coefficient.scale(monomial_value(&c, t));
                    }
                    out
                };
                let unit_value = eval(&[Element::identity(&AlgebraShape::commutative(*coords))]);
                let mut b = MapDescriptor::builder("monomial", vec![AlgebraShape::commutative(*coords)], cod, eval)
                    .linearity(linearity)
                    .claim(Claim::Tracial);
                if cp {
                    b = b.claims(positivity_claims(usize::MAX));
                }
                if is_identity(&unit_value) {
                    b = b.claim(Claim::Unital);
                }
                Ok(b)
            }
            MapSpec::CenterTrace { shape } => {
                Ok(MapDescriptor::builder("center_trace", vec![shape.clone()], AlgebraShape::commutative(shape.block_count()), |args| {
                    let a = &args[0];
                    let c: Vec<C64> = a.block_traces().iter().zip(a.shape().dims()).map(|(t, &d)| t / d as f64).collect();
                    Element::diagonal_coords(&c)
                })
                .linearity(Linearity::Linear)
                .claims(positivity_claims(usize::MAX))
                .claims([Claim::Unital, Claim::Tracial]))
            }
            MapSpec::CenterBundle { shape, copies } => {
                if *copies == 0 {
                    return invalid("center bundle needs at least one copy");
                }
                let copies = *copies;
                let p = shape.block_count();
                Ok(MapDescriptor::builder(
                    "center_bundle",
                    vec![shape.clone()],
                    AlgebraShape::commutative(2 * copies * p),
                    move |args| {
                        let a = &args[0];
                        let c: Vec<C64> =
                            a.block_traces().iter().zip(a.shape().dims()).map(|(t, &d)| t / d as f64).collect();
                        let mut coords = Vec::with_capacity(2 * copies * c.len());
                        for _ in 0..copies {
                            coords.extend(c.iter().copied());
                        }
                        for _ in 0..copies {
                            coords.extend(c.iter().map(|z| z.conj()));
                        }
                        Element::diagonal_coords(&coords)
                    },
                )
                .linearity(Linearity::Polynomial { degree: 1 })
                .claims(positivity_claims(usize::MAX))
                .claims([Claim::Unital, Claim::Tracial]))
            }
            MapSpec::CenterRestriction { map, slots } => center_restriction_builder(map.build()?, slots),
            MapSpec::SlotCenterTrace { slots } => slot_center_trace_builder(slots),
            MapSpec::NonlinearCenterLift { map, shape, degree } => {
                let inner = map.build()?;
                crate::decomposition::nonlinear_center_lift_builder(&inner, shape, *degree)
            }
            MapSpec::WordPolynomial { shape, terms } => {
                if terms.is_empty() {
                    return invalid("word polynomial needs a term");
                }
                for t in terms {
                    for l in &t.letters {
                        if let Letter::Const(e) = l {
                            if e.shape() != shape {
                                return invalid("constant letters must live on the map's shape");
                            }
                        }
                    }
                }
                let degrees: Vec<(usize, usize)> = terms
                    .iter()
                    .map(|t| {
                        let m = t.letters.iter().filter(|l| matches!(l, Letter::A)).count();
                        let n = t.letters.iter().filter(|l| matches!(l, Letter::AStar)).count();
                        (m, n)
                    })
                    .collect();
                let terms2 = terms.clone();
                let shape2 = shape.clone();
                Ok(MapDescriptor::builder("word_polynomial", vec![shape.clone()], shape.clone(), move |args| {
                    let a = &args[0];
                    let a_star = a.adjoint();
                    let mut out = Element::zeros(&shape2);
                    for t in &terms2 {
                        let mut w = Element::identity(&shape2);
                        for l in &t.letters {
                            w = match l {
                                Letter::A => &w * a,
                                Letter::AStar => &w * &a_star,
                                Letter::Const(e) => &w * e,
                            };
                        }
                        out = &out + &w.scale(C64::new(t.coefficient[0], t.coefficient[1]));
                    }
                    out
                })
                .linearity(bidegree_linearity(&degrees)))
            }
        }
    }
}

/// Whether each monomial term is multilinear with respect to the slot
/// grouping of a state bundle.
fn multilinear_over_groups(inner: &MapSpec, outer: &MapSpec) -> bool {
    let (MapSpec::StateBundle { slots }, MapSpec::Monomial { terms, .. }) = (inner, outer) else {
        return false;
    };
    let sizes: Vec<usize> = slots.iter().map(|s| s.len()).collect();
    terms.iter().all(|t| {
        if t.antiholomorphic.iter().any(|&b| b != 0) {
            return false;
        }
        let mut offset = 0;
        sizes.iter().all(|&sz| {
            let group: u32 = (offset..offset + sz).map(|j| t.holomorphic.get(j).copied().unwrap_or(0)).sum();
            offset += sz;
            group == 1
        }) && t.holomorphic.iter().skip(offset).all(|&a| a == 0)
    })
}

fn composite_builder(inner_spec: &MapSpec, outer_spec: &MapSpec) -> Result<MapBuilder, MapError> {
    compose(&inner_spec.build()?, &outer_spec.build()?)
}

/// `outer ∘ inner` with claims derived from both maps. When both carry a
/// spec, the result carries the composite spec.
pub fn compose(inner: &MapDescriptor, outer: &MapDescriptor) -> Result<MapBuilder, MapError> {
    if outer.arity() != 1 || outer.domain_shapes()[0] != *inner.codomain_shape() {
        return invalid("outer map must take one argument on the inner map's codomain");
    }
    let linearity = if inner.linearity() == Linearity::Linear && outer.is_linear() {
        Linearity::Linear
    } else if inner.linearity() == Linearity::Linear
        && matches!((inner.spec(), outer.spec()), (Some(i), Some(o)) if multilinear_over_groups(i, o))
    {
        Linearity::Multilinear
    } else if inner.arity() == 1 && inner.is_linear() {
        outer.linearity()
    } else {
        match (degree_of(inner), degree_of(outer)) {
            (Some(a), Some(b)) => Linearity::Polynomial { degree: a * b },
            _ => Linearity::Opaque,
        }
    };
    let mut claims = Vec::new();
    if inner.has_claim(Claim::Unital) && outer.has_claim(Claim::Unital) {
        claims.push(Claim::Unital);
    }
    if inner.has_claim(Claim::Tracial) {
        claims.push(Claim::Tracial);
    }
    let in_order = inner.positivity_order();
    let out_order = outer.positivity_order();
    let commutative_factor =
        inner.linearity() == Linearity::Linear && in_order >= 1 && inner.codomain_shape().is_commutative();
    // Positive maps into a commutative algebra are completely positive.
    let effective_in = if commutative_factor { usize::MAX } else { in_order };
    claims.extend(positivity_claims(effective_in.min(out_order)));
    if commutative_factor && out_order >= 1 {
        claims.push(Claim::PropertyD(if out_order == usize::MAX { None } else { Some(out_order) }));
    }
    let degree = match linearity {
        Linearity::Opaque => inner.degree_bound().max(outer.degree_bound()),
        _ => degree_of_linearity(linearity, inner.arity()),
    };
    let (i2, o2) = (inner.clone(), outer.clone());
    let spec = match (inner.spec(), outer.spec()) {
        (Some(i), Some(o)) => Some(MapSpec::Composite { inner: Box::new(i.clone()), outer: Box::new(o.clone()) }),
        _ => None,
    };
    let builder = MapDescriptor::builder(
        format!("{}∘{}", outer.name(), inner.name()),
        inner.domain_shapes().to_vec(),
        outer.codomain_shape().clone(),
        move |args| o2.eval(&[i2.eval(args)]),
    )
    .linearity(linearity)
    .degree_bound(degree)
    .claims(claims);
    Ok(match spec {
        Some(s) => builder.spec(s),
        None => builder,
    })
}

/// `Φ` restricted to block-scalar arguments and read as a map on the
/// coordinate algebra `C^p`, p the total block count of `slots`.
pub fn center_restriction_builder(inner: MapDescriptor, slots: &[AlgebraShape]) -> Result<MapBuilder, MapError> {
                if inner.domain_shapes() != slots {
                    return invalid("slot shapes must match the restricted map's domains");
                }
                let linearity = match inner.linearity() {
                    Linearity::Linear => Linearity::Linear,
                    Linearity::Multilinear if inner.arity() == 1 => Linearity::Linear,
                    Linearity::Multilinear => Linearity::Polynomial { degree: inner.arity() },
                    other => other,
                };
                let p: usize = slots.iter().map(|s| s.block_count()).sum();
                let keep: Vec<Claim> = inner
                    .claims()
                    .iter()
                    .copied()
                    .filter(|c| matches!(c, Claim::Unital | Claim::Positive | Claim::NPositive(_) | Claim::CompletelyPositive))
                    .collect();
                let degree = inner.degree_bound();
                let slots2 = slots.to_vec();
                Ok(MapDescriptor::builder("center_restriction", vec![AlgebraShape::commutative(p)], inner.codomain_shape().clone(), move |args| {
                    let c = args[0].coords();
                    let mut offset = 0;
                    let lifted: Vec<Element> = slots2
                        .iter()
                        .map(|s| {
                            let n = s.block_count();
                            let e = Element::block_scalars(s, &c[offset..offset + n]).expect("coordinate count matches");
                            offset += n;
                            e
                        })
                        .collect();
                    inner.eval(&lifted)
                })
                .linearity(linearity)
                .degree_bound(degree)
                .claims(keep)
                .claim(Claim::Tracial))
}

/// Slot-wise normalized block traces `(A_1, …, A_k) ↦ (tr A_{i,b} / d_b)`
/// as one point of `C^p`.
fn slot_center_trace_builder(slots: &[AlgebraShape]) -> Result<MapBuilder, MapError> {
    if slots.is_empty() {
        return invalid("slot center trace needs a slot");
    }
    let p: usize = slots.iter().map(|s| s.block_count()).sum();
    Ok(MapDescriptor::builder("slot_center_trace", slots.to_vec(), AlgebraShape::commutative(p), |args| {
        let coords: Vec<C64> = args
            .iter()
            .flat_map(|a| a.block_traces().into_iter().zip(a.shape().dims().to_vec()).map(|(t, d)| t / d as f64))
            .collect();
        Element::diagonal_coords(&coords)
    })
    .linearity(Linearity::Linear)
    .claims(positivity_claims(usize::MAX))
    .claims([Claim::Unital, Claim::Tracial]))
}

fn degree_of_linearity(l: Linearity, arity: usize) -> usize {
    match l {
        Linearity::Linear => 1,
        Linearity::Multilinear => arity,
        Linearity::MixedHomogeneous { m, n } => m + n,
        Linearity::Polynomial { degree } => degree,
        Linearity::Opaque => super::descriptor::DEFAULT_DEGREE_BOUND,
    }
}
