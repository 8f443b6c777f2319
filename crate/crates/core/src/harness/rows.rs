use std::io::Write;

use serde::{Deserialize, Serialize};

use super::symbol::SymbolReport;
use super::Method;
use crate::error::Result;

/// First line of every rate CSV.
pub const CSV_SCHEMA: &str = "# thpnoma-rates v1";
/// First line of every symbol-check CSV.
pub const SYMBOL_CSV_SCHEMA: &str = "# thpnoma-symbols v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    SnrDb,
    Eta,
}

/// One method on one trial at one sweep point. Rates are in bits per channel
/// use; a failed trial keeps zero rates and carries the error in `status`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub axis: SweepAxis,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub sum_strong: f64,
    pub sum_weak: f64,
    pub sum_total: f64,
    pub wall_time_s: Option<f64>,
    pub sca_iterations: usize,
    pub status: String,
}

impl ResultRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn write_csv<W: Write, T: Serialize>(mut out: W, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(out, "{schema}")?;
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Schema line, header, then one line per row.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    write_csv(out, CSV_SCHEMA, rows)
}

pub fn write_symbol_rows<W: Write>(out: W, reports: &[SymbolReport]) -> Result<()> {
    write_csv(out, SYMBOL_CSV_SCHEMA, reports)
}
