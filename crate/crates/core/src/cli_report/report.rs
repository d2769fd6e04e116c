//! Deterministic JSON and CSV output.

use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::rng::RNG_ID;

pub const TOOL: &str = "relsamp";

/// Pretty printer writing every float with 17 significant digits.
struct Sig17<'a>(PrettyFormatter<'a>);

/// `x` with 17 significant digits; non-finite values become `null`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

impl Formatter for Sig17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub config: RunConfig,
    pub results: serde_json::Value,
    pub duration_seconds: f64,
}

impl Report {
    pub fn new(config: RunConfig, results: serde_json::Value, duration_seconds: f64) -> Self {
        Self { tool: TOOL.into(), version: env!("CARGO_PKG_VERSION").into(), rng: RNG_ID.into(), config, results, duration_seconds }
    }

    /// Copy with the wall-clock field zeroed, for determinism comparisons.
    pub fn without_duration(&self) -> Self {
        Self { duration_seconds: 0.0, ..self.clone() }
    }
}

/// A CSV table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::File { path: "<csv buffer>".into(), source: e.into_error() })?;
        Ok(String::from_utf8(bytes).expect("csv of UTF-8 cells"))
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::File { path: path.display().to_string(), source })
}

/// Write the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &Report, path: Option<&Path>) -> Result<()> {
    let text = to_json(report)?;
    match path {
        Some(p) => write_file(p, &text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| Error::File { path: "<stdout>".into(), source })
        }
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    write_file(path, &table.to_csv()?)
}
