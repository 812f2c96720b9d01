//! Report envelopes: every report embeds the manifest of the run that
//! produced it.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Budgets {
    pub node_budget: u64,
    /// `None` when the wall-clock budget is disabled.
    pub time_budget_s: Option<u64>,
    pub max_horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub version: &'static str,
    pub input: Vec<String>,
    pub seed: u64,
    /// Seconds since the epoch, from `SOURCE_DATE_EPOCH` when set; absent in
    /// deterministic runs without it.
    pub timestamp: Option<u64>,
    pub budgets: Budgets,
}

/// `SOURCE_DATE_EPOCH`, else the clock unless the run is deterministic.
pub fn timestamp(deterministic: bool) -> Option<u64> {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
    {
        return Some(t);
    }
    if deterministic {
        return None;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub report: &'a T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A flat table for `--format csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::invalid(format!("cannot write report: {e}"))
}

pub fn render_json<T: Serialize>(manifest: &RunManifest, report: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(&Envelope { manifest, report }).map_err(io_error)?;
    out.push(b'\n');
    Ok(out)
}

/// CSV with the manifest as leading `#` comment lines.
pub fn render_csv(manifest: &RunManifest, table: &Table) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let meta = serde_json::to_string(manifest).map_err(io_error)?;
    writeln!(out, "# manifest: {meta}").map_err(io_error)?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(&table.header).map_err(io_error)?;
    for row in &table.rows {
        w.write_record(row).map_err(io_error)?;
    }
    w.flush().map_err(io_error)?;
    drop(w);
    Ok(out)
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(io_error),
        None => std::io::stdout().write_all(bytes).map_err(io_error),
    }
}
