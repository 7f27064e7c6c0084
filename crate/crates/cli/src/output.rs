//! CSV tables (17 significant digits) and JSON sidecars.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            Cell::Num(v) => (if *v > 0.0 { "inf" } else { "-inf" }).into(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// One CSV table. Column names carry the symbol and unit, e.g. `omega_eV`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
        w.write_record(&self.columns).map_err(err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })
    }
}

/// A named table plus the metadata written next to it.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub stem: String,
    pub table: Table,
    pub meta: serde_json::Value,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("metadata is always representable as JSON")
}

/// Writes `<stem>.csv` and `<stem>.json` under `dir`; returns both paths.
pub fn write_artifact(dir: &Path, a: &Artifact) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", a.stem));
    let json_path = dir.join(format!("{}.json", a.stem));
    write_file(&csv_path, &a.table.to_csv()?)?;
    let mut meta = a.meta.clone();
    if let Some(obj) = meta.as_object_mut() {
        obj.insert("columns".into(), to_json(&a.table.columns));
        obj.insert("rows".into(), a.table.rows.len().into());
    }
    let mut text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::io(&json_path, e))?;
    text.push('\n');
    write_file(&json_path, text.as_bytes())?;
    Ok((csv_path, json_path))
}
