use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::testers::{test_positive, test_tracial, TesterConfig, Verdict};
use super::{MapError, MapSpec, Notion};
use crate::algebra::{AlgebraShape, Element, ToleranceConfig};
use crate::random::{complex_gaussian, random_element, trial_rng, Population};

pub type Evaluator = Arc<dyn Fn(&[Element]) -> Element + Send + Sync>;

/// Default truncation order for maps without a declared polynomial degree.
pub const DEFAULT_DEGREE_BOUND: usize = 6;

const REGISTRATION_TRIALS: u64 = 20;
const REGISTRATION_TOL: f64 = 1e-9;
const REGISTRATION_SEED: u64 = 0x005E_ED0F_C1A1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearity {
    /// Linear on the direct sum of all slots.
    Linear,
    /// Linear in each slot separately.
    Multilinear,
    /// Single slot, `Φ(zA) = z^m z̄^n Φ(A)`.
    MixedHomogeneous { m: usize, n: usize },
    Polynomial { degree: usize },
    Opaque,
}

/// Structural property a map asserts about itself; verified at registration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Claim {
    Unital,
    Tracial,
    Positive,
    NPositive(usize),
    CompletelyPositive,
    /// Factorization through a commutative algebra with an m-positive outer
    /// map; `None` means every order.
    PropertyD(Option<usize>),
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Claim::Unital => write!(f, "unital"),
            Claim::Tracial => write!(f, "tracial"),
            Claim::Positive => write!(f, "positive"),
            Claim::NPositive(n) => write!(f, "n_positive({n})"),
            Claim::CompletelyPositive => write!(f, "completely_positive"),
            Claim::PropertyD(None) => write!(f, "property_d(inf)"),
            Claim::PropertyD(Some(m)) => write!(f, "property_d({m})"),
        }
    }
}

impl FromStr for Claim {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MapError::InvalidSpec(format!("unknown claim '{s}'"));
        let arg = |prefix: &str| -> Option<&str> { s.strip_prefix(prefix)?.strip_suffix(')') };
        Ok(match s {
            "unital" => Claim::Unital,
            "tracial" => Claim::Tracial,
            "positive" => Claim::Positive,
            "completely_positive" => Claim::CompletelyPositive,
            _ => {
                if let Some(n) = arg("n_positive(") {
                    let n: usize = n.parse().map_err(|_| bad())?;
                    if n == 0 {
                        return Err(bad());
                    }
                    Claim::NPositive(n)
                } else if let Some(m) = arg("property_d(") {
                    if m == "inf" {
                        Claim::PropertyD(None)
                    } else {
                        Claim::PropertyD(Some(m.parse().map_err(|_| bad())?))
                    }
                } else {
                    return Err(bad());
                }
            }
        })
    }
}

impl Serialize for Claim {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Claim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A deterministic input replayed by testers before random search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredWitness {
    pub notion: Notion,
    pub args: Vec<Element>,
}

/// A k-ary map between block algebras with its structural metadata.
#[derive(Clone)]
pub struct MapDescriptor {
    name: String,
    domain_shapes: Vec<AlgebraShape>,
    codomain_shape: AlgebraShape,
    linearity: Linearity,
    degree_bound: usize,
    claims: BTreeSet<Claim>,
    evaluator: Evaluator,
    spec: Option<MapSpec>,
    witnesses: Vec<StoredWitness>,
    population: Population,
}

impl fmt::Debug for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapDescriptor")
            .field("name", &self.name)
            .field("domain_shapes", &self.domain_shapes)
            .field("codomain_shape", &self.codomain_shape)
            .field("linearity", &self.linearity)
            .field("claims", &self.claims)
            .finish_non_exhaustive()
    }
}

/// Builder that ends in [`MapBuilder::register`], which runs the spot checks.
pub struct MapBuilder {
    inner: MapDescriptor,
}

impl MapBuilder {
    pub fn linearity(mut self, linearity: Linearity) -> Self {
        self.inner.linearity = linearity;
        if let Linearity::Polynomial { degree } = linearity {
            self.inner.degree_bound = degree;
        }
        if let Linearity::MixedHomogeneous { m, n } = linearity {
            self.inner.degree_bound = m + n;
        }
        if linearity == Linearity::Linear {
            self.inner.degree_bound = 1;
        }
        if linearity == Linearity::Multilinear {
            self.inner.degree_bound = self.inner.domain_shapes.len();
        }
        self
    }

    pub fn degree_bound(mut self, degree: usize) -> Self {
        self.inner.degree_bound = degree;
        self
    }

    pub fn claim(mut self, claim: Claim) -> Self {
        self.inner.claims.insert(claim);
        self
    }

    pub fn claims(mut self, claims: impl IntoIterator<Item = Claim>) -> Self {
        self.inner.claims.extend(claims);
        self
    }

    pub fn spec(mut self, spec: MapSpec) -> Self {
        self.inner.spec = Some(spec);
        self
    }

    pub fn witness(mut self, w: StoredWitness) -> Self {
        self.inner.witnesses.push(w);
        self
    }

    pub fn population(mut self, p: Population) -> Self {
        self.inner.population = p;
        self
    }

    /// Verifies linearity, unitality, traciality and positivity claims by
    /// randomized spot checks; any failure rejects the descriptor.
    pub fn register(self) -> Result<MapDescriptor, MapError> {
        let map = self.inner;
        map.verify_claims()?;
        Ok(map)
    }

    /// Skips verification. Meant for maps whose claims are known to fail,
    /// such as counterexamples fed to refutation searches.
    pub fn build_unverified(self) -> MapDescriptor {
        self.inner
    }
}

impl MapDescriptor {
    pub fn builder(
        name: impl Into<String>,
        domain_shapes: Vec<AlgebraShape>,
        codomain_shape: AlgebraShape,
        evaluator: impl Fn(&[Element]) -> Element + Send + Sync + 'static,
    ) -> MapBuilder {
        assert!(!domain_shapes.is_empty(), "maps need at least one argument");
        let degree_bound = DEFAULT_DEGREE_BOUND;
        MapBuilder {
            inner: MapDescriptor {
                name: name.into(),
                domain_shapes,
                codomain_shape,
                linearity: Linearity::Opaque,
                degree_bound,
                claims: BTreeSet::new(),
                evaluator: Arc::new(evaluator),
                spec: None,
                witnesses: Vec::new(),
                population: Population::Complex,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.domain_shapes.len()
    }

    pub fn domain_shapes(&self) -> &[AlgebraShape] {
        &self.domain_shapes
    }

    pub fn codomain_shape(&self) -> &AlgebraShape {
        &self.codomain_shape
    }

    pub fn linearity(&self) -> Linearity {
        self.linearity
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn claims(&self) -> &BTreeSet<Claim> {
        &self.claims
    }

    pub fn has_claim(&self, claim: Claim) -> bool {
        self.claims.contains(&claim)
    }

    pub fn spec(&self) -> Option<&MapSpec> {
        self.spec.as_ref()
    }

    pub fn witnesses(&self) -> &[StoredWitness] {
        &self.witnesses
    }

    pub fn population(&self) -> Population {
        self.population
    }

    pub fn is_linear(&self) -> bool {
        self.linearity == Linearity::Linear
            || (self.linearity == Linearity::Multilinear && self.arity() == 1)
    }

    /// True when every slot has the same shape (needed for type-1 amplification).
    pub fn has_homogeneous_domains(&self) -> bool {
        self.domain_shapes.iter().all(|s| s == &self.domain_shapes[0])
    }

    /// Largest n for which the claims imply n-positivity (`usize::MAX` for
    /// complete positivity, 0 when nothing is claimed).
    pub fn positivity_order(&self) -> usize {
        self.claims
            .iter()
            .map(|c| match c {
                Claim::CompletelyPositive | Claim::PropertyD(None) => usize::MAX,
                Claim::NPositive(n) | Claim::PropertyD(Some(n)) => *n,
                Claim::Positive => 1,
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Order m of the claimed factorization property, if any.
    pub fn property_d_order(&self) -> Option<usize> {
        self.claims
            .iter()
            .filter_map(|c| match c {
                Claim::PropertyD(m) => Some(m.unwrap_or(usize::MAX)),
                _ => None,
            })
            .max()
    }

    pub fn unit_args(&self) -> Vec<Element> {
        self.domain_shapes.iter().map(Element::identity).collect()
    }

    pub fn zero_args(&self) -> Vec<Element> {
        self.domain_shapes.iter().map(Element::zeros).collect()
    }

    /// Evaluates the map after checking arity and argument shapes.
    pub fn evaluate(&self, args: &[Element]) -> Result<Element, MapError> {
        if args.len() != self.arity() {
            return Err(MapError::Arity { expected: self.arity(), found: args.len() });
        }
        for (i, (a, s)) in args.iter().zip(&self.domain_shapes).enumerate() {
            if a.shape() != s {
                return Err(MapError::ArgumentShape { slot: i, expected: s.clone(), found: a.shape().clone() });
            }
        }
        let out = (self.evaluator)(args);
        if out.shape() != &self.codomain_shape {
            return Err(MapError::Evaluator(format!(
                "{} returned shape {} instead of {}",
                self.name,
                out.shape(),
                self.codomain_shape
            )));
        }
        Ok(out)
    }

    /// Evaluation for arguments already known to be well shaped.
    pub(crate) fn eval(&self, args: &[Element]) -> Element {
        self.evaluate(args).expect("arguments were shape checked by the caller")
    }

    fn random_args(&self, rng: &mut crate::random::TrialRng) -> Vec<Element> {
        self.domain_shapes.iter().map(|s| random_element(rng, s)).collect()
    }

    fn verify_claims(&self) -> Result<(), MapError> {
        let reject = |what: String| Err(MapError::Registration { map: self.name.clone(), reason: what });
        match self.linearity {
            Linearity::Linear => {
                for t in 0..REGISTRATION_TRIALS {
                    let mut rng = trial_rng(REGISTRATION_SEED, t);
                    let a = self.random_args(&mut rng);
                    let b = self.random_args(&mut rng);
                    let z = complex_gaussian(&mut rng);
                    let mixed: Vec<Element> = a.iter().zip(&b).map(|(x, y)| x + &y.scale(z)).collect();
                    let lhs = self.evaluate(&mixed)?;
                    let rhs = &self.evaluate(&a)? + &self.evaluate(&b)?.scale(z);
                    let err = lhs.distance(&rhs)?;
                    if err > REGISTRATION_TOL * (1.0 + lhs.norm() + rhs.norm()) {
                        return reject(format!("linearity spot check failed (error {err:.3e})"));
                    }
                }
            }
            Linearity::Multilinear => {
                for t in 0..REGISTRATION_TRIALS {
                    let mut rng = trial_rng(REGISTRATION_SEED, t);
                    let a = self.random_args(&mut rng);
                    let b = self.random_args(&mut rng);
                    let z = complex_gaussian(&mut rng);
                    let base = self.evaluate(&a)?;
                    for slot in 0..self.arity() {
                        let mut with_b = a.clone();
                        with_b[slot] = b[slot].clone();
                        let mut mixed = a.clone();
                        mixed[slot] = &a[slot] + &b[slot].scale(z);
                        let lhs = self.evaluate(&mixed)?;
                        let rhs = &base + &self.evaluate(&with_b)?.scale(z);
                        let err = lhs.distance(&rhs)?;
                        if err > REGISTRATION_TOL * (1.0 + lhs.norm() + rhs.norm()) {
                            return reject(format!("multilinearity spot check failed in slot {slot} (error {err:.3e})"));
                        }
                    }
                }
            }
            Linearity::MixedHomogeneous { m, n } => {
                if self.arity() != 1 {
                    return reject("mixed homogeneous maps take a single argument".into());
                }
                for t in 0..REGISTRATION_TRIALS {
                    let mut rng = trial_rng(REGISTRATION_SEED, t);
                    let a = self.random_args(&mut rng);
                    let z = complex_gaussian(&mut rng);
                    let lhs = self.evaluate(&[a[0].scale(z)])?;
                    let factor = z.powu(m as u32) * z.conj().powu(n as u32);
                    let rhs = self.evaluate(&a)?.scale(factor);
                    let err = lhs.distance(&rhs)?;
                    if err > REGISTRATION_TOL * (1.0 + lhs.norm() + rhs.norm()) {
                        return reject(format!("({m},{n})-homogeneity spot check failed (error {err:.3e})"));
                    }
                }
            }
            Linearity::Polynomial { .. } | Linearity::Opaque => {}
        }
        if self.has_claim(Claim::Unital) {
            let out = self.evaluate(&self.unit_args())?;
            let err = out.distance(&Element::identity(&self.codomain_shape))?;
            if err > REGISTRATION_TOL {
                return reject(format!("unitality claim failed (error {err:.3e})"));
            }
        }
        if self.has_claim(Claim::Tracial) {
            let report = test_tracial(self, REGISTRATION_TRIALS, REGISTRATION_SEED, REGISTRATION_TOL)?;
            if !report.verdict {
                return reject(format!("traciality claim failed (residual {:.3e})", report.global));
            }
        }
        let order = self.positivity_order();
        if order >= 1 {
            let n = match order {
                usize::MAX if self.is_linear() && self.arity() == 1 && self.domain_shapes[0].block_count() == 1 => {
                    self.domain_shapes[0].dims()[0]
                }
                o => o.min(3),
            };
            let cfg = TesterConfig {
                trials: REGISTRATION_TRIALS,
                seed: REGISTRATION_SEED,
                tol: ToleranceConfig::default(),
                ..TesterConfig::default()
            };
            let report = test_positive(self, Notion::Type2(n), &cfg)?;
            if report.verdict == Verdict::Violated {
                return reject(format!(
                    "positivity claim of order {} refuted at n={n} (min eigenvalue {:.3e})",
                    if order == usize::MAX { "inf".to_string() } else { order.to_string() },
                    report.min_eig
                ));
            }
        }
        Ok(())
    }

    /// Copy of this map with extra claims, re-verified.
    pub fn with_claims(&self, claims: impl IntoIterator<Item = Claim>) -> Result<Self, MapError> {
        let mut copy = self.clone();
        copy.claims.extend(claims);
        copy.verify_claims()?;
        Ok(copy)
    }

    /// Sum of two maps with the same signature; claims are dropped except
    /// those preserved by addition of like maps.
    pub fn sum(&self, other: &MapDescriptor) -> Result<MapDescriptor, MapError> {
        if self.domain_shapes != other.domain_shapes || self.codomain_shape != other.codomain_shape {
            return Err(MapError::InvalidSpec("sum of maps with different signatures".into()));
        }
        let (a, b) = (self.clone(), other.clone());
        let linearity = if self.linearity == other.linearity && !matches!(self.linearity, Linearity::Opaque) {
            self.linearity
        } else {
            Linearity::Polynomial { degree: self.degree_bound.max(other.degree_bound) }
        };
        let mut builder = MapDescriptor::builder(
            format!("{}+{}", self.name, other.name),
            self.domain_shapes.clone(),
            self.codomain_shape.clone(),
            move |args| &a.eval(args) + &b.eval(args),
        )
        .linearity(linearity)
        .degree_bound(self.degree_bound.max(other.degree_bound));
        if self.has_claim(Claim::Tracial) && other.has_claim(Claim::Tracial) {
            builder = builder.claim(Claim::Tracial);
        }
        builder.register()
    }
}
