//! Named examples and counterexamples with expected verdicts. Each case
//! builds its maps, replays its stored witnesses and runs the positivity
//! testers; [`reproduce_all`] runs the whole catalog.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraShape, CMatrix, Element, C64};
use crate::maps::{
    matrix_unit_probe, test_positive, MapDescriptor, MapError, MapSpec, Notion, PositivityReport, StoredWitness,
    TesterConfig, Verdict,
};
use crate::random::Population;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GalleryError {
    #[error("unknown case '{0}'")]
    UnknownCase(String),
    #[error("case '{case}' has no parameter '{param}'")]
    UnknownParameter { case: String, param: String },
    #[error("bad value '{value}' for parameter '{param}': {reason}")]
    BadParameter { param: String, value: String, reason: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

pub type CaseParams = BTreeMap<String, String>;

/// Catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseInfo {
    pub id: &'static str,
    pub description: &'static str,
    /// Parameter names with their default values.
    pub parameters: Vec<(&'static str, &'static str)>,
}

/// One tester run inside a case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub label: String,
    /// `None` for informational runs that do not affect the case verdict.
    pub expected: Option<Verdict>,
    pub report: PositivityReport,
    pub population: Population,
}

impl CheckOutcome {
    /// An expected `exhausted_trials` is also met by a certificate.
    pub fn matches(&self) -> bool {
        match self.expected {
            None => true,
            Some(Verdict::Violated) => self.report.verdict == Verdict::Violated,
            Some(_) => self.report.verdict != Verdict::Violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    pub params: CaseParams,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub case: String,
    pub check: String,
    pub notion: Notion,
    pub expected: Option<Verdict>,
    pub observed: Verdict,
    pub min_eig: f64,
    pub trials: u64,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GallerySummary {
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
    pub passed: bool,
}

const DEFAULT_TRIALS: &str = "1000";
const THRESHOLD_TRIALS: &str = "10000";

/// Case catalog, sorted by id.
pub fn list_cases() -> Vec<CaseInfo> {
    let mut cases = vec![
        CaseInfo {
            id: "theta_transpose_tensor",
            description: "(A, B) ↦ Aᵀ ⊗ Bᵀ is not 2-positive of type 2: the matrix-unit witness E gives a negative eigenvalue",
            parameters: vec![("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "theta_positive",
            description: "(A, B) ↦ Aᵀ ⊗ Bᵀ is positive: no violation of type2(1)",
            parameters: vec![("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "hadamard_power_threshold",
            description: "Entrywise |x|^α on real M_m is n-positive iff α ≥ nm − 2 (non-integer α); without parameters the brackets (3,1,{0.5,1,3}) and (2,2,{1.5,2}) run",
            parameters: vec![("m", "-"), ("n", "-"), ("alpha", "-"), ("trials", THRESHOLD_TRIALS)],
        },
        CaseInfo {
            id: "c01_hadamard_type1",
            description: "Schur product of four 2×2 matrices over C[0,1] (sampled at p points) is not positive of type 1",
            parameters: vec![("p", "32")],
        },
        CaseInfo {
            id: "projection_Lambda",
            description: "(A₁, …, A_k) ↦ (A₁, …, A_{k−1}) is not positive of type 1: witness (−I, I, …, I, −I)",
            parameters: vec![("k", "4"), ("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "product_Pi_type1_cp",
            description: "(A₁, …, A_k) ↦ A₁⋯A_k on M_2 passes type1(n) for n = 1, 2, 3",
            parameters: vec![("k", "3"), ("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "product_Pi_type2",
            description: "(A, B) ↦ AB on M_2 is not positive of type 2",
            parameters: vec![("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "product_Pi_commutative",
            description: "(A, B) ↦ AB on a commutative algebra passes type2(3)",
            parameters: vec![("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "conjugate_power",
            description: "Schur product of |x|^{2α_i} on M_m is n-positive when min α_i ≥ nm − 2",
            parameters: vec![("m", "2"), ("n", "2"), ("alpha", "2.0,2.5"), ("trials", DEFAULT_TRIALS)],
        },
        CaseInfo {
            id: "operator_norm_not_3_positive",
            description: "X ↦ ‖X‖ is 2-positive but not 3-positive",
            parameters: vec![("trials", DEFAULT_TRIALS)],
        },
    ];
    cases.sort_by_key(|c| c.id);
    cases
}

struct Params<'a> {
    case: &'a CaseInfo,
    values: &'a CaseParams,
}

impl Params<'_> {
    fn check_known(&self) -> Result<(), GalleryError> {
        for key in self.values.keys() {
            if !self.case.parameters.iter().any(|(k, _)| k == key) {
                return Err(GalleryError::UnknownParameter { case: self.case.id.into(), param: key.clone() });
            }
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).or_else(|| {
            self.case.parameters.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).filter(|v| *v != "-")
        })
    }

    fn given(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, GalleryError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key).ok_or_else(|| GalleryError::BadParameter {
            param: key.into(),
            value: String::new(),
            reason: "missing".into(),
        })?;
        v.parse().map_err(|e: T::Err| GalleryError::BadParameter {
            param: key.into(),
            value: v.into(),
            reason: e.to_string(),
        })
    }

    fn positive(&self, key: &str) -> Result<usize, GalleryError> {
        let v: usize = self.parse(key)?;
        if v == 0 {
            return Err(GalleryError::BadParameter { param: key.into(), value: "0".into(), reason: "must be positive".into() });
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, GalleryError> {
        let v = self.raw(key).unwrap_or_default();
        v.split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| GalleryError::BadParameter {
                    param: key.into(),
                    value: v.into(),
                    reason: e.to_string(),
                })
            })
            .collect()
    }
}

fn run_check(
    label: impl Into<String>,
    map: &MapDescriptor,
    notion: Notion,
    expected: Option<Verdict>,
    seed: u64,
    trials: u64,
    population: Option<Population>,
) -> Result<CheckOutcome, GalleryError> {
    let cfg = TesterConfig { trials, seed, population, ..TesterConfig::default() };
    let report = test_positive(map, notion, &cfg)?;
    Ok(CheckOutcome { label: label.into(), expected, report, population: population.unwrap_or(map.population()) })
}

fn theta(shape: &AlgebraShape) -> Result<MapDescriptor, GalleryError> {
    let e = matrix_unit_probe(shape, 2);
    Ok(MapSpec::TransposeTensor { shape: shape.clone() }
        .builder()?
        .witness(StoredWitness { notion: Notion::Type2(2), args: vec![e.clone(), e] })
        .register()?)
}

/// Expected verdict of the entrywise power |x|^α on real M_m at type2(n).
fn hadamard_expectation(m: usize, n: usize, alpha: f64) -> Option<Verdict> {
    let threshold = (n * m) as f64 - 2.0;
    if alpha >= threshold {
        return Some(Verdict::ExhaustedTrials);
    }
    if alpha.fract() != 0.0 {
        return Some(Verdict::Violated);
    }
    // Even integers are Schur powers; odd ones below the threshold are open here.
    if (alpha as i64) % 2 == 0 {
        Some(Verdict::ExhaustedTrials)
    } else {
        None
    }
}

fn hadamard_checks(m: usize, n: usize, alpha: f64, seed: u64, trials: u64) -> Result<Vec<CheckOutcome>, GalleryError> {
    let map = MapSpec::HadamardPower { shape: AlgebraShape::square(m), exponents: vec![alpha], conjugate: false }.build()?;
    let label = format!("m={m} n={n} alpha={alpha}");
    Ok(vec![
        run_check(format!("{label} real"), &map, Notion::Type2(n), hadamard_expectation(m, n, alpha), seed, trials, Some(Population::Real))?,
        // Complex Hermitian inputs are reported separately and do not decide the case.
        run_check(format!("{label} complex"), &map, Notion::Type2(n), None, seed, trials, Some(Population::Complex))?,
    ])
}

/// Tuple `(A₁, A₂, A₃, A₄)` over p sample points `x_s = s/(p−1)` with
/// `A₁ = [[x, x], [1, 0]]`, `A₂ = A₃` all ones and `A₄ = A₁*`.
fn c01_witness(p: usize) -> Vec<Element> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let xs: Vec<f64> = (0..p).map(|s| if p > 1 { s as f64 / (p - 1) as f64 } else { 1.0 }).collect();
    let build = |f: &dyn Fn(C64) -> [C64; 4]| {
        let blocks = xs.iter().map(|&x| CMatrix::from_row_slice(2, 2, &f(C64::new(x, 0.0)))).collect();
        Element::new(AlgebraShape::new(vec![2; xs.len()]).expect("p ≥ 1"), blocks).expect("2×2 blocks")
    };
    let a1 = build(&|x| [x, x, one, zero]);
    let ones = build(&|_| [one; 4]);
    vec![a1.clone(), ones.clone(), ones, a1.adjoint()]
}

fn run_inner(info: &CaseInfo, params: &CaseParams, seed: u64) -> Result<Vec<CheckOutcome>, GalleryError> {
    let p = Params { case: info, values: params };
    p.check_known()?;
    let trials = || -> Result<u64, GalleryError> { Ok(p.positive("trials")? as u64) };
    let m2 = AlgebraShape::square(2);
    match info.id {
        "theta_transpose_tensor" => {
            Ok(vec![run_check("type2(2) with witness E", &theta(&m2)?, Notion::Type2(2), Some(Verdict::Violated), seed, trials()?, None)?])
        }
        "theta_positive" => {
            Ok(vec![run_check("type2(1)", &theta(&m2)?, Notion::Type2(1), Some(Verdict::ExhaustedTrials), seed, trials()?, None)?])
        }
        "hadamard_power_threshold" => {
            let t = trials()?;
            let given = ["m", "n", "alpha"].iter().filter(|k| p.given(k)).count();
            if given == 0 {
                let bracket = [(3, 1, 0.5), (3, 1, 1.0), (3, 1, 3.0), (2, 2, 1.5), (2, 2, 2.0)];
                let mut out = Vec::new();
                for (m, n, alpha) in bracket {
                    out.extend(hadamard_checks(m, n, alpha, seed, t)?);
                }
                Ok(out)
            } else if given == 3 {
                let alpha: f64 = p.parse("alpha")?;
                if !alpha.is_finite() || alpha < 0.0 {
                    return Err(GalleryError::BadParameter {
                        param: "alpha".into(),
                        value: alpha.to_string(),
                        reason: "must be nonnegative".into(),
                    });
                }
                hadamard_checks(p.positive("m")?, p.positive("n")?, alpha, seed, t)
            } else {
                Err(GalleryError::BadParameter {
                    param: "m, n, alpha".into(),
                    value: String::new(),
                    reason: "give all three or none".into(),
                })
            }
        }
        "c01_hadamard_type1" => {
            let points = p.positive("p")?;
            let shape = AlgebraShape::new(vec![2; points]).map_err(MapError::from)?;
            let map = MapSpec::HadamardProduct { shape, arity: 4 }
                .builder()?
                .witness(StoredWitness { notion: Notion::Type1(1), args: c01_witness(points) })
                .register()?;
            Ok(vec![run_check("type1(1)", &map, Notion::Type1(1), Some(Verdict::Violated), seed, 0, None)?])
        }
        "projection_Lambda" => {
            let k = p.positive("k")?;
            if k < 2 {
                return Err(GalleryError::BadParameter { param: "k".into(), value: k.to_string(), reason: "needs k ≥ 2".into() });
            }
            let id = Element::identity(&m2);
            let mut w = vec![id.clone(); k];
            w[0] = -&id;
            w[k - 1] = -&id;
            let map = MapSpec::Projection { shape: m2.clone(), arity: k }
                .builder()?
                .witness(StoredWitness { notion: Notion::Type1(1), args: w })
                .register()?;
            Ok(vec![run_check("type1(1)", &map, Notion::Type1(1), Some(Verdict::Violated), seed, trials()?, None)?])
        }
        "product_Pi_type1_cp" => {
            let map = MapSpec::Product { shape: m2.clone(), arity: p.positive("k")? }.build()?;
            let t = trials()?;
            (1..=3)
                .map(|n| run_check(format!("type1({n})"), &map, Notion::Type1(n), Some(Verdict::ExhaustedTrials), seed, t, None))
                .collect()
        }
        "product_Pi_type2" => {
            let half = C64::new(0.5, 0.0);
            let e11 = Element::from_matrix(CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default()]))
                .map_err(MapError::from)?;
            let flat = Element::from_matrix(CMatrix::from_element(2, 2, half)).map_err(MapError::from)?;
            let map = MapSpec::Product { shape: m2.clone(), arity: 2 }
                .builder()?
                .witness(StoredWitness { notion: Notion::Type2(1), args: vec![e11, flat] })
                .register()?;
            Ok(vec![run_check("type2(1)", &map, Notion::Type2(1), Some(Verdict::Violated), seed, trials()?, None)?])
        }
        "product_Pi_commutative" => {
            let map = MapSpec::Product { shape: AlgebraShape::commutative(3), arity: 2 }.build()?;
            Ok(vec![run_check("type2(3)", &map, Notion::Type2(3), Some(Verdict::ExhaustedTrials), seed, trials()?, None)?])
        }
        "conjugate_power" => {
            let (m, n) = (p.positive("m")?, p.positive("n")?);
            let alphas = p.list("alpha")?;
            if alphas.is_empty() || alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
                return Err(GalleryError::BadParameter {
                    param: "alpha".into(),
                    value: format!("{alphas:?}"),
                    reason: "need nonnegative exponents".into(),
                });
            }
            let min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
            let expected = (min >= (n * m) as f64 - 2.0).then_some(Verdict::ExhaustedTrials);
            let map = MapSpec::HadamardPower { shape: AlgebraShape::square(m), exponents: alphas, conjugate: true }.build()?;
            Ok(vec![run_check(format!("type2({n})"), &map, Notion::Type2(n), expected, seed, trials()?, None)?])
        }
        "operator_norm_not_3_positive" => {
            let map = MapSpec::OperatorNorm { shape: m2 }.build()?;
            let t = trials()?;
            Ok(vec![
                run_check("type2(2)", &map, Notion::Type2(2), Some(Verdict::ExhaustedTrials), seed, t, None)?,
                run_check("type2(3)", &map, Notion::Type2(3), Some(Verdict::Violated), seed, t, None)?,
            ])
        }
        other => Err(GalleryError::UnknownCase(other.into())),
    }
}

/// Runs one case; unspecified parameters take their defaults.
pub fn run_case(id: &str, params: &CaseParams, seed: u64) -> Result<CaseResult, GalleryError> {
    let cases = list_cases();
    let info = cases.iter().find(|c| c.id == id).ok_or_else(|| GalleryError::UnknownCase(id.into()))?;
    let checks = run_inner(info, params, seed)?;
    let passed = checks.iter().all(CheckOutcome::matches);
    Ok(CaseResult { id: id.into(), params: params.clone(), seed, checks, passed })
}

/// Every case with default parameters, rows ordered by case id.
pub fn reproduce_all(seed: u64) -> Result<GallerySummary, GalleryError> {
    let results: Vec<CaseResult> =
        list_cases().par_iter().map(|c| run_case(c.id, &CaseParams::new(), seed)).collect::<Result<_, _>>()?;
    let rows: Vec<SummaryRow> = results
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| SummaryRow {
                case: r.id.clone(),
                check: c.label.clone(),
                notion: c.report.notion,
                expected: c.expected,
                observed: c.report.verdict,
                min_eig: c.report.min_eig,
                trials: c.report.trials,
                matches: c.matches(),
            })
        })
        .collect();
    let passed = rows.iter().all(|r| r.matches);
    Ok(GallerySummary { seed, rows, passed })
}

#[cfg(test)]
mod tests;
