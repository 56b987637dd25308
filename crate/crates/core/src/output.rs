//! CSV tables and the TOML manifest written alongside them.
//!
//! Numbers are printed with 17 significant digits (`{:.16e}`), so a value
//! read back from a CSV round-trips to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Column-named table of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Builds a table from equally long columns.
    pub fn from_columns(header: &[&str], columns: &[&[f64]]) -> Self {
        assert_eq!(header.len(), columns.len(), "one name per column");
        let n = columns.first().map_or(0, |c| c.len());
        assert!(columns.iter().all(|c| c.len() == n), "ragged columns");
        let mut table = Self::new(header.iter().copied());
        for i in 0..n {
            table.push(columns.iter().map(|c| c[i]).collect());
        }
        table
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{}", format_value(*x)).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_csv_string())
    }

    /// Parses text produced by [`CsvTable::to_csv_string`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty CSV".into()))?;
        let mut table = Self::new(header.split(','));
        for (k, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidConfig(format!("CSV line {}: {e}", k + 2)))?;
            if row.len() != table.header.len() {
                return Err(Error::InvalidConfig(format!(
                    "CSV line {}: wrong width",
                    k + 2
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

fn format_value(x: f64) -> String {
    if x == 0.0 {
        // no "-0" in output
        format!("{:.16e}", 0.0)
    } else {
        format!("{x:.16e}")
    }
}

/// One emitted file as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub kind: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

impl FileEntry {
    pub fn for_table(name: &str, kind: &str, table: &CsvTable) -> Self {
        Self {
            name: name.to_string(),
            kind: kind.to_string(),
            rows: table.rows().len(),
            columns: table.header().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToleranceRecord {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub wronskian_residual: f64,
    pub pinney_residual: f64,
    pub theta_consistency: f64,
}

/// Contents of `manifest.toml`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub generator: String,
    pub version: String,
    pub command: String,
    pub tolerances: ToleranceRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsRecord>,
    /// Fully resolved configuration, defaults filled in.
    pub config: toml::Table,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.toml";

impl Manifest {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(format!("manifest: {e}")))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(MANIFEST_NAME), &self.to_toml_string()?)
    }
}

/// Writes every table into `dir` (created if needed) and returns their
/// manifest entries in order.
pub fn write_tables(dir: &Path, tables: &[(String, String, CsvTable)]) -> Result<Vec<FileEntry>> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    tables
        .iter()
        .map(|(name, kind, table)| {
            table.write(&dir.join(name))?;
            Ok(FileEntry::for_table(name, kind, table))
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
