//! Tabular output: one header row, decimal strings, LF line endings.

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    /// Binary stream dump, `gen` only.
    Bin,
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| CliError::io(e.into()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(e.into()))?;
        }
        w.into_inner().map_err(|e| CliError::io(e.into_error()))
    }

    /// Rows as JSON objects keyed by the header, all values as strings.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    Value::Object(
                        self.header.iter().zip(row).map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect(),
                    )
                })
                .collect(),
        )
    }
}

/// Shortest round-trip decimal, switching to scientific notation outside `[1e-4, 1e15)`.
pub fn float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.into()))?;
    out.push(b'\n');
    Ok(out)
}
