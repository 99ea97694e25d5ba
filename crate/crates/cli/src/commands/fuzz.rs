use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use opmap_core::algebra::{Element, ToleranceConfig};
use opmap_core::maps::{test_positive, MapDocument, Notion, TesterConfig, Verdict};
use serde::{Deserialize, Serialize};

use super::{load_map, read_json, write_report};
use crate::output::SummaryRow;
use crate::{InputError, Outcome, RunConfig};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Map spec JSON.
    pub spec: PathBuf,
    /// Comma-separated notions, e.g. `type2(1),type2(2)`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub notions: Vec<String>,
    /// Random trials per notion.
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    /// Trials per notion between checkpoints.
    #[arg(long, default_value_t = 4096)]
    pub round: u64,
    /// Checkpoint file; resumed from when it exists.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotionState {
    pub notion: Notion,
    pub verdict: Verdict,
    /// Smallest eigenvalue seen so far; `None` before any evaluation.
    pub min_eig: Option<f64>,
    /// Random trials evaluated, counting up to and including a violation.
    pub trials: u64,
    pub witness: Option<Vec<Element>>,
}

impl NotionState {
    fn active(&self) -> bool {
        self.verdict == Verdict::ExhaustedTrials
    }
}

/// Resumable search state. The trial cursor is shared by all notions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub map: MapDocument,
    pub seed: u64,
    pub tol: ToleranceConfig,
    pub cursor: u64,
    pub states: Vec<NotionState>,
}

#[derive(Serialize)]
struct FuzzReport<'a> {
    check: &'a str,
    seed: u64,
    budget: u64,
    cursor: u64,
    violation: bool,
    states: &'a [NotionState],
}

/// Writes next to the target and renames over it.
fn write_atomic(path: &Path, text: &str) -> Result<(), InputError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, text)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn resume(path: &Path, fresh: &Checkpoint) -> Result<Checkpoint, InputError> {
    let cp: Checkpoint = read_json(path)?;
    if cp.version != CHECKPOINT_VERSION {
        return Err(InputError(format!("checkpoint version {} is not supported", cp.version)));
    }
    if cp.tol != fresh.tol {
        return Err(InputError(format!(
            "checkpoint was written with tolerances {:?}; refusing to resume under {:?}",
            cp.tol, fresh.tol
        )));
    }
    if cp.seed != fresh.seed {
        return Err(InputError(format!("checkpoint seed {:#x} differs from --seed {:#x}", cp.seed, fresh.seed)));
    }
    if cp.map != fresh.map {
        return Err(InputError("checkpoint belongs to a different map spec".into()));
    }
    let ours: Vec<Notion> = fresh.states.iter().map(|s| s.notion).collect();
    let theirs: Vec<Notion> = cp.states.iter().map(|s| s.notion).collect();
    if ours != theirs {
        return Err(InputError("checkpoint notions differ from --notions".into()));
    }
    Ok(cp)
}

pub fn run(args: &FuzzArgs, cfg: &RunConfig) -> Result<Outcome, InputError> {
    if args.round == 0 {
        return Err(InputError("--round must be positive".into()));
    }
    let notions: Vec<Notion> = args.notions.iter().map(|n| n.trim().parse()).collect::<Result<_, _>>()?;
    let (doc, map) = load_map(&args.spec)?;
    let tol = cfg.tolerances()?;
    let fresh = Checkpoint {
        version: CHECKPOINT_VERSION,
        map: doc,
        seed: cfg.seed,
        tol,
        cursor: 0,
        states: notions
            .iter()
            .map(|&notion| NotionState { notion, verdict: Verdict::ExhaustedTrials, min_eig: None, trials: 0, witness: None })
            .collect(),
    };
    let mut cp = match &args.checkpoint {
        Some(p) if p.exists() => resume(p, &fresh)?,
        _ => fresh,
    };
    let violated = |cp: &Checkpoint| cp.states.iter().any(|s| s.verdict == Verdict::Violated);
    while cp.cursor < args.budget && !violated(&cp) && cp.states.iter().any(NotionState::active) {
        let round = args.round.min(args.budget - cp.cursor);
        for state in cp.states.iter_mut().filter(|s| s.active()) {
            let tester = TesterConfig { trials: round, seed: cp.seed, tol: cp.tol, start: cp.cursor, ..TesterConfig::default() };
            let r = test_positive(&map, state.notion, &tester)?;
            if r.min_eig.is_finite() {
                state.min_eig = Some(state.min_eig.map_or(r.min_eig, |m| m.min(r.min_eig)));
            }
            state.trials += r.trials;
            state.verdict = r.verdict;
            state.witness = r.witness;
            if r.verdict == Verdict::Violated {
                break;
            }
        }
        cp.cursor += round;
        if let Some(p) = &args.checkpoint {
            write_atomic(p, &serde_json::to_string_pretty(&cp)?)?;
        }
    }
    let report = FuzzReport {
        check: map.name(),
        seed: cp.seed,
        budget: args.budget,
        cursor: cp.cursor,
        violation: violated(&cp),
        states: &cp.states,
    };
    let rows: Vec<SummaryRow> = cp
        .states
        .iter()
        .map(|s| SummaryRow::new(format!("{}:{}", map.name(), s.notion), s.verdict, s.min_eig.unwrap_or(f64::NAN), cp.seed, s.trials))
        .collect();
    write_report(&report, &rows, cfg)?;
    Ok(Outcome::from_violation(report.violation))
}
