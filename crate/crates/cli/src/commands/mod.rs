pub mod check;
pub mod decompose;
pub mod fuzz;
pub mod gallery;
pub mod uncertainty;

use std::fs;
use std::path::Path;

use opmap_core::maps::{MapDescriptor, MapDocument};
use serde::de::DeserializeOwned;

use crate::output::{csv_string, emit, json_string, Format, SummaryRow};
use crate::{InputError, RunConfig};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Reads a map document and registers it, verifying its claims.
pub fn load_map(path: &Path) -> Result<(MapDocument, MapDescriptor), InputError> {
    let doc: MapDocument = read_json(path)?;
    let map = doc.build().map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok((doc, map))
}

/// JSON gets the full value; CSV gets the summary rows.
pub fn write_report<T: serde::Serialize>(value: &T, rows: &[SummaryRow], cfg: &RunConfig) -> Result<(), InputError> {
    let text = match cfg.format {
        Format::Json => json_string(value)?,
        Format::Csv => csv_string(rows)?,
    };
    emit(&text, cfg.out.as_deref())
}
