//! Row/table construction, CSV and JSON serialization, atomic file writes
//! and the run manifest.
//!
//! CSV cells never need quoting: numeric cells are full-precision scientific
//! notation (17 significant digits, so every f64 round-trips bit-exactly)
//! and string cells contain no commas.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::F(x) => fmt_f64(*x),
            Value::U(n) => n.to_string(),
            Value::B(b) => b.to_string(),
            Value::S(s) => s.clone(),
        }
    }

    fn human(&self) -> String {
        match self {
            Value::F(x) => format!("{x}"),
            Value::U(n) => n.to_string(),
            Value::B(b) => b.to_string(),
            Value::S(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::F(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Value::U(n) => serde_json::Value::from(*n),
            Value::B(b) => serde_json::Value::from(*b),
            Value::S(s) => serde_json::Value::from(s.as_str()),
        }
    }
}

/// Full-precision scientific notation; 17 significant digits uniquely
/// identify an f64, so parsing the cell recovers the exact bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// A rectangular result set with a fixed column schema.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of flat objects with keys identical to the CSV columns.
    pub fn to_json(&self) -> String {
        let array: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut object = serde_json::Map::new();
                for (name, value) in self.columns.iter().zip(row) {
                    object.insert((*name).to_string(), value.json());
                }
                serde_json::Value::Object(object)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&array).expect("static schema serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Space-aligned table for the terminal.
    pub fn human(&self) -> String {
        let mut cells: Vec<Vec<String>> =
            vec![self.columns.iter().map(|c| c.to_string()).collect()];
        cells.extend(
            self.rows
                .iter()
                .map(|row| row.iter().map(Value::human).collect::<Vec<_>>()),
        );
        let mut widths = vec![0usize; self.columns.len()];
        for row in &cells {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let mut out = String::new();
        for row in &cells {
            let mut line = String::new();
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                let _ = write!(line, "{cell:<width$}", width = widths[i]);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Everything needed to reproduce a run: resolved parameters in the same
/// flat key = value format the config reader accepts, plus `meta.*` lines
/// the reader ignores.
#[derive(Debug, Clone)]
pub struct Manifest {
    command: &'static str,
    /// (key, value) pairs in resolution order; keys may repeat (sweep axes).
    entries: Vec<(String, String)>,
    warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            entries: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), fmt_f64(value)));
    }

    pub fn warn(&mut self, warning: impl Into<String>) {
        let warning = warning.into();
        if !self.warnings.contains(&warning) {
            self.warnings.push(warning);
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn render(&self) -> String {
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "# qir run manifest; rerun with --config <this file>");
        let _ = writeln!(out, "meta.tool = qir {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "meta.command = {}", self.command);
        let _ = writeln!(out, "meta.timestamp_unix = {timestamp}");
        let warnings = if self.warnings.is_empty() {
            "none".to_string()
        } else {
            self.warnings.join(";")
        };
        let _ = writeln!(out, "meta.warnings = {warnings}");
        for (key, value) in &self.entries {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

/// Write `contents` to `path` atomically (same-directory temp file, then
/// rename over the target).
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{}: not a file path", path.display())))?;
    let mut tmp: PathBuf = path.to_path_buf();
    tmp.set_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(contents.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

/// Write the rendered table plus its sidecar manifest (`<path>.manifest`).
pub fn write_output(
    path: &Path,
    format: Format,
    table: &Table,
    manifest: &Manifest,
) -> Result<(), CliError> {
    write_atomic(path, &table.render(format))?;
    let manifest_path = PathBuf::from(format!("{}.manifest", path.display()));
    write_atomic(&manifest_path, &manifest.render())
}
