use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use crate::InputError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// One line of the CSV summary.
#[derive(Debug, Serialize)]
pub struct SummaryRow {
    pub check: String,
    pub verdict: String,
    pub margin: Option<f64>,
    pub seed: u64,
    pub trials: u64,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl SummaryRow {
    pub fn new(check: impl Into<String>, verdict: impl ToString, margin: f64, seed: u64, trials: u64) -> Self {
        Self { check: check.into(), verdict: verdict.to_string(), margin: finite(margin), seed, trials }
    }
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String, InputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| InputError(e.to_string()))?;
    Ok(String::from_utf8(bytes)?)
}

pub fn json_string<T: Serialize>(value: &T) -> Result<String, InputError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes to `out` or stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), InputError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
