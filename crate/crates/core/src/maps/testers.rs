use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::choi::{commuting_projection_probe, matrix_unit_probe};
use super::{amplify_type1, amplify_type2, MapDescriptor, MapError};
use crate::algebra::{is_positive, AlgebraShape, CMatrix, Element, PositivityCheck, ToleranceConfig, C64};
use crate::random::{
    complex_gaussian, random_element, random_hermitian, random_psd, random_unitary, trial_rng, Population, TrialRng,
};

/// What a positivity report certifies or refutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Notion {
    /// Contracted amplification on mirrored tuples.
    Type1(usize),
    /// Entrywise amplification on PSD tuples.
    Type2(usize),
    /// Choi matrix eigenvalues (linear maps on one block).
    ChoiExact,
    /// `Φ(A*A) − Φ(A*)Φ(A) ⪰ 0`.
    ChoiInequality,
    /// `Φ(A) − Φ(B) − Φ(A−B) ⪰ 0` for `A ⪰ B ⪰ 0`.
    Superadditive,
    /// `Φ(A) − Φ(B) ⪰ 0` for `A ⪰ B ⪰ 0`.
    Monotone,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notion::Type1(n) => write!(f, "type1({n})"),
            Notion::Type2(n) => write!(f, "type2({n})"),
            Notion::ChoiExact => write!(f, "choi_exact"),
            Notion::ChoiInequality => write!(f, "choi_inequality"),
            Notion::Superadditive => write!(f, "superadditive"),
            Notion::Monotone => write!(f, "monotone"),
        }
    }
}

impl FromStr for Notion {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MapError::InvalidNotion(format!("unrecognized notion '{s}'"));
        let parse_n = |body: &str| -> Result<usize, MapError> {
            let n: usize = body.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(MapError::InvalidNotion("amplification order must be at least 1".into()));
            }
            Ok(n)
        };
        match s {
            "choi_exact" => Ok(Notion::ChoiExact),
            "choi_inequality" => Ok(Notion::ChoiInequality),
            "superadditive" => Ok(Notion::Superadditive),
            "monotone" => Ok(Notion::Monotone),
            _ => {
                if let Some(b) = s.strip_prefix("type1(").and_then(|r| r.strip_suffix(')')) {
                    Ok(Notion::Type1(parse_n(b)?))
                } else if let Some(b) = s.strip_prefix("type2(").and_then(|r| r.strip_suffix(')')) {
                    Ok(Notion::Type2(parse_n(b)?))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl Serialize for Notion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Notion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedPositive,
    Violated,
    ExhaustedTrials,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CertifiedPositive => "certified_positive",
            Verdict::Violated => "violated",
            Verdict::ExhaustedTrials => "exhausted_trials",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub check: String,
    pub notion: Notion,
    pub verdict: Verdict,
    pub min_eig: f64,
    pub trials: u64,
    pub seed: u64,
    pub witness: Option<Vec<Element>>,
}

/// Knobs shared by the randomized testers.
#[derive(Clone, Debug, PartialEq)]
pub struct TesterConfig {
    pub trials: u64,
    pub seed: u64,
    pub tol: ToleranceConfig,
    /// Overrides the map's preferred sampling ensemble.
    pub population: Option<Population>,
    /// Use the Choi certificate when it applies.
    pub exact_upgrade: bool,
    /// Index of the first random trial; later trials keep their seeds.
    pub start: u64,
    /// Replay stored and built-in deterministic probes first.
    pub probes: bool,
}

impl Default for TesterConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0xC5A1,
            tol: ToleranceConfig::default(),
            population: None,
            exact_upgrade: true,
            start: 0,
            probes: true,
        }
    }
}

const CHUNK: u64 = 256;

fn inferred_order(map: &MapDescriptor, args: &[Element]) -> Result<usize, MapError> {
    let (Some(a), Some(s)) = (args.first(), map.domain_shapes().first()) else {
        return Err(MapError::Arity { expected: map.arity(), found: args.len() });
    };
    let n = a.shape().dims()[0] / s.dims()[0];
    if n == 0 {
        return Err(MapError::InvalidNotion("witness smaller than the domain".into()));
    }
    Ok(n)
}

fn split_pair(map: &MapDescriptor, args: &[Element]) -> Result<(Vec<Element>, Vec<Element>), MapError> {
    let k = map.arity();
    if args.len() != 2 * k {
        return Err(MapError::Arity { expected: 2 * k, found: args.len() });
    }
    Ok((args[..k].to_vec(), args[k..].to_vec()))
}

/// The element whose positivity a notion asserts, for the given inputs.
pub fn notion_target(map: &MapDescriptor, notion: Notion, args: &[Element]) -> Result<Element, MapError> {
    match notion {
        Notion::Type1(n) => amplify_type1(map, n, args),
        Notion::Type2(n) => amplify_type2(map, n, args),
        Notion::ChoiExact => amplify_type2(map, inferred_order(map, args)?, args),
        Notion::ChoiInequality => {
            let star: Vec<Element> = args.iter().map(Element::adjoint).collect();
            let gram: Vec<Element> = args.iter().zip(&star).map(|(a, s)| s * a).collect();
            let lhs = map.evaluate(&gram)?;
            let rhs = &map.evaluate(&star)? * &map.evaluate(args)?;
            Ok(&lhs - &rhs)
        }
        Notion::Superadditive => {
            let (a, b) = split_pair(map, args)?;
            let diff: Vec<Element> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            Ok(&(&map.evaluate(&a)? - &map.evaluate(&b)?) - &map.evaluate(&diff)?)
        }
        Notion::Monotone => {
            let (a, b) = split_pair(map, args)?;
            Ok(&map.evaluate(&a)? - &map.evaluate(&b)?)
        }
    }
}

/// Re-evaluates a witness under a notion.
pub fn evaluate_notion(
    map: &MapDescriptor,
    notion: Notion,
    args: &[Element],
    tol: &ToleranceConfig,
) -> Result<PositivityCheck, MapError> {
    Ok(is_positive(&notion_target(map, notion, args)?, tol))
}

/// Probes first, then seeded random trials in fixed-size parallel chunks.
/// The reported violation is the one with the lowest trial index, so the
/// result does not depend on scheduling.
fn search(
    map: &MapDescriptor,
    notion: Notion,
    cfg: &TesterConfig,
    probes: Vec<Vec<Element>>,
    sampler: impl Fn(&mut TrialRng) -> Vec<Element> + Sync,
) -> Result<PositivityReport, MapError> {
    let mut min_eig = f64::INFINITY;
    let report = |verdict, min_eig, trials, witness| PositivityReport {
        check: map.name().to_string(),
        notion,
        verdict,
        min_eig,
        trials,
        seed: cfg.seed,
        witness,
    };
    if cfg.probes && cfg.start == 0 {
        for probe in probes {
            let c = evaluate_notion(map, notion, &probe, &cfg.tol)?;
            if !c.verdict {
                return Ok(report(Verdict::Violated, c.min_eig, 0, Some(probe)));
            }
            min_eig = min_eig.min(c.min_eig);
        }
    }
    let end = cfg.start + cfg.trials;
    let mut chunk_start = cfg.start;
    while chunk_start < end {
        let chunk_end = (chunk_start + CHUNK).min(end);
        let results: Vec<(u64, Vec<Element>, PositivityCheck)> = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(cfg.seed, t);
                let args = sampler(&mut rng);
                let c = evaluate_notion(map, notion, &args, &cfg.tol)?;
                Ok((t, args, c))
            })
            .collect::<Result<_, MapError>>()?;
        for (t, args, c) in results {
            if !c.verdict {
                return Ok(report(Verdict::Violated, c.min_eig, t - cfg.start + 1, Some(args)));
            }
            min_eig = min_eig.min(c.min_eig);
        }
        chunk_start = chunk_end;
    }
    Ok(report(Verdict::ExhaustedTrials, min_eig, cfg.trials, None))
}

fn mirrored_tuple(rng: &mut TrialRng, shape: &AlgebraShape, k: usize, population: Population) -> Vec<Element> {
    let mut out: Vec<Option<Element>> = vec![None; k];
    for i in 0..k / 2 {
        let a = random_element(rng, shape);
        out[k - 1 - i] = Some(a.adjoint());
        out[i] = Some(a);
    }
    if k % 2 == 1 {
        out[k / 2] = Some(random_psd(rng, shape, population));
    }
    out.into_iter().map(|a| a.expect("every slot filled")).collect()
}

/// Samples n-positivity of either type. Linear single-block maps tested at
/// type2(n) with n ≥ d are settled exactly through the Choi matrix.
pub fn test_positive(map: &MapDescriptor, notion: Notion, cfg: &TesterConfig) -> Result<PositivityReport, MapError> {
    let population = cfg.population.unwrap_or(map.population());
    let k = map.arity();
    match notion {
        Notion::Type1(0) | Notion::Type2(0) => {
            return Err(MapError::InvalidNotion("amplification order must be at least 1".into()))
        }
        Notion::Type1(_) if !map.has_homogeneous_domains() => return Err(MapError::HeterogeneousDomains),
        Notion::Type1(_) | Notion::Type2(_) => {}
        Notion::ChoiExact => {}
        other => return Err(MapError::InvalidNotion(format!("{other} is not an n-positivity notion"))),
    }
    let single_block = k == 1 && map.domain_shapes()[0].block_count() == 1 && map.is_linear();
    if single_block {
        let d = map.domain_shapes()[0].dims()[0];
        let upgrade = match notion {
            Notion::ChoiExact => true,
            Notion::Type2(n) => cfg.exact_upgrade && n >= d,
            _ => false,
        };
        if upgrade {
            let n = match notion {
                Notion::Type2(n) => n,
                _ => d,
            };
            let witness = vec![matrix_unit_probe(&map.domain_shapes()[0], n)];
            let c = evaluate_notion(map, Notion::ChoiExact, &witness, &cfg.tol)?;
            let (verdict, witness) =
                if c.verdict { (Verdict::CertifiedPositive, None) } else { (Verdict::Violated, Some(witness)) };
            return Ok(PositivityReport {
                check: map.name().to_string(),
                notion: Notion::ChoiExact,
                verdict,
                min_eig: c.min_eig,
                trials: 0,
                seed: cfg.seed,
                witness,
            });
        }
    }
    if notion == Notion::ChoiExact {
        return Err(MapError::NotApplicable("exact Choi test needs a linear map on one block".into()));
    }
    let mut probes: Vec<Vec<Element>> =
        map.witnesses().iter().filter(|w| w.notion == notion).map(|w| w.args.clone()).collect();
    match notion {
        Notion::Type2(n) => {
            if n >= 2 {
                probes.push(map.domain_shapes().iter().map(|s| matrix_unit_probe(s, n)).collect());
            }
            if n >= 3 {
                probes.push(map.domain_shapes().iter().map(|s| commuting_projection_probe(s, n)).collect());
            }
            let shapes: Vec<AlgebraShape> = map.domain_shapes().iter().map(|s| s.amplified(n)).collect();
            search(map, notion, cfg, probes, |rng| shapes.iter().map(|s| random_psd(rng, s, population)).collect())
        }
        Notion::Type1(n) => {
            let shape = map.domain_shapes()[0].amplified(n);
            if k >= 2 {
                let mut t = vec![Element::identity(&shape); k];
                t[0] = -&t[0];
                t[k - 1] = -&t[k - 1];
                probes.push(t);
            }
            if n >= 2 {
                probes.push(vec![matrix_unit_probe(&map.domain_shapes()[0], n); k]);
            }
            search(map, notion, cfg, probes, |rng| mirrored_tuple(rng, &shape, k, population))
        }
        _ => unreachable!("filtered above"),
    }
}

/// Residuals of `Φ(…,AB,…) − Φ(…,BA,…)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracialReport {
    pub per_slot: Vec<f64>,
    pub global: f64,
    pub scale: f64,
    pub verdict: bool,
    pub trials: u64,
    pub seed: u64,
}

/// Traciality in every slot: verdict holds iff the largest residual is at
/// most `tol · scale`, with `scale = 1 + max ‖Φ(…,AB,…)‖`.
pub fn test_tracial(map: &MapDescriptor, trials: u64, seed: u64, tol: f64) -> Result<TracialReport, MapError> {
    let k = map.arity();
    let rows: Vec<(Vec<f64>, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let base: Vec<Element> = map.domain_shapes().iter().map(|s| random_element(&mut rng, s)).collect();
            let mut res = vec![0.0; k];
            let mut scale: f64 = 0.0;
            for (slot, s) in map.domain_shapes().iter().enumerate() {
                let a = random_element(&mut rng, s);
                let b = random_element(&mut rng, s);
                let mut ab = base.clone();
                ab[slot] = &a * &b;
                let mut ba = base.clone();
                ba[slot] = &b * &a;
                let x = map.evaluate(&ab)?;
                let y = map.evaluate(&ba)?;
                res[slot] = x.distance(&y)?;
                scale = scale.max(x.norm()).max(y.norm());
            }
            Ok((res, scale))
        })
        .collect::<Result<_, MapError>>()?;
    let mut per_slot = vec![0.0f64; k];
    let mut scale = 0.0f64;
    for (r, s) in rows {
        for (p, v) in per_slot.iter_mut().zip(r) {
            *p = p.max(v);
        }
        scale = scale.max(s);
    }
    let global = per_slot.iter().copied().fold(0.0, f64::max);
    let scale = 1.0 + scale;
    Ok(TracialReport { per_slot, global, scale, verdict: global <= tol * scale, trials, seed })
}

/// Inputs for the Choi-type inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChoiInputs {
    /// Hermitian elements and unitarily rotated complex diagonals.
    Normal,
    /// Unstructured elements (the inequality then needs 2-positivity).
    Arbitrary,
}

fn random_normal(rng: &mut TrialRng, shape: &AlgebraShape) -> Element {
    if rng.random::<bool>() {
        return random_hermitian(rng, shape);
    }
    let blocks = shape
        .dims()
        .iter()
        .map(|&d| {
            let u = random_unitary(rng, d);
            let diag = CMatrix::from_fn(d, d, |i, j| if i == j { complex_gaussian(rng) } else { C64::new(0.0, 0.0) });
            &u * diag * u.adjoint()
        })
        .collect();
    let x = Element::new(shape.clone(), blocks).expect("shape preserved");
    let n = x.norm();
    if n > 0.0 { x.scale_real(1.0 / n) } else { x }
}

fn require_unital(map: &MapDescriptor) -> Result<(), MapError> {
    let err = map.evaluate(&map.unit_args())?.distance(&Element::identity(map.codomain_shape()))?;
    if err > 1e-9 {
        return Err(MapError::NotApplicable(format!("map is not unital (‖Φ(I) − I‖ = {err:.3e})")));
    }
    Ok(())
}

/// Searches for inputs with `Φ(A*A) − Φ(A*)Φ(A) ⋡ 0`.
pub fn test_choi_inequality(
    map: &MapDescriptor,
    cfg: &TesterConfig,
    inputs: ChoiInputs,
) -> Result<PositivityReport, MapError> {
    require_unital(map)?;
    let shapes = map.domain_shapes().to_vec();
    search(map, Notion::ChoiInequality, cfg, Vec::new(), move |rng| match inputs {
        ChoiInputs::Normal => shapes.iter().map(|s| random_normal(rng, s)).collect(),
        ChoiInputs::Arbitrary => shapes.iter().map(|s| random_element(rng, s)).collect(),
    })
}

fn ordered_pairs(map: &MapDescriptor, rng: &mut TrialRng, population: Population) -> Vec<Element> {
    let b: Vec<Element> = map.domain_shapes().iter().map(|s| random_psd(rng, s, population)).collect();
    let a: Vec<Element> = b
        .iter()
        .zip(map.domain_shapes())
        .map(|(x, s)| x + &random_psd(rng, s, population))
        .collect();
    a.into_iter().chain(b).collect()
}

/// Checks `Φ(A−B) ⪯ Φ(A) − Φ(B)` for `A ⪰ B ⪰ 0`; applicable to maps
/// claiming 3-positivity with `Φ(0) = 0`.
pub fn test_superadditive(map: &MapDescriptor, cfg: &TesterConfig) -> Result<PositivityReport, MapError> {
    if map.positivity_order() < 3 {
        return Err(MapError::NotApplicable("superadditivity needs a 3-positive map".into()));
    }
    let at_zero = map.evaluate(&map.zero_args())?.norm();
    if at_zero > cfg.tol.eq_tol {
        return Err(MapError::NotApplicable(format!("Φ(0) ≠ 0 (norm {at_zero:.3e})")));
    }
    let population = cfg.population.unwrap_or(map.population());
    search(map, Notion::Superadditive, cfg, Vec::new(), |rng| ordered_pairs(map, rng, population))
}

/// Checks `A ⪰ B ⪰ 0 ⇒ Φ(A) ⪰ Φ(B)`.
pub fn check_monotone(map: &MapDescriptor, cfg: &TesterConfig) -> Result<PositivityReport, MapError> {
    let population = cfg.population.unwrap_or(map.population());
    search(map, Notion::Monotone, cfg, Vec::new(), |rng| ordered_pairs(map, rng, population))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub max_deviation: f64,
    pub scale: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Largest `‖Φ(A₁*,…,A_k*) − Φ(A₁,…,A_k)*‖` over random tuples.
pub fn check_self_adjoint(map: &MapDescriptor, trials: u64, seed: u64) -> Result<DeviationReport, MapError> {
    let rows: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let args: Vec<Element> = map.domain_shapes().iter().map(|s| random_element(&mut rng, s)).collect();
            let star: Vec<Element> = args.iter().map(Element::adjoint).collect();
            let x = map.evaluate(&args)?;
            let y = map.evaluate(&star)?;
            Ok((y.distance(&x.adjoint())?, x.norm()))
        })
        .collect::<Result<_, MapError>>()?;
    let max_deviation = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let scale = 1.0 + rows.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(DeviationReport { max_deviation, scale, trials, seed })
}
