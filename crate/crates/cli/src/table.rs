//! Long-format tables and their CSV/JSON rendering.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::options::{Format, Settings};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Written with 17 significant digits.
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// A number written in shortest round-trip form.
    Plain(f64),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Plain(x) if x.is_finite() => x.to_string(),
            Cell::Plain(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) | Cell::Plain(x) if x.is_finite() => {
                let raw = RawValue::from_string(self.render()).map_err(serde::ser::Error::custom)?;
                raw.serialize(s)
            }
            Cell::Num(_) | Cell::Plain(_) | Cell::Empty => s.serialize_none(),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

struct Records<'a>(&'a Table);

impl Serialize for Records<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for row in &self.0.rows {
            seq.serialize_element(&Record(&self.0.columns, row))?;
        }
        seq.end()
    }
}

struct Record<'a>(&'a [String], &'a [Cell]);

impl Serialize for Record<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// A command's result: the main table plus an optional summary table.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: Option<Table>,
    pub rows: Table,
}

fn csv_line(cells: impl IntoIterator<Item = String>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(cells)?;
    Ok(String::from_utf8(w.into_inner().context("csv buffer")?)?)
}

pub fn render(settings: &Settings, report: &Report) -> Result<String> {
    match settings.format {
        Format::Csv => render_csv(settings, report),
        Format::Json => render_json(settings, report),
    }
}

fn render_csv(settings: &Settings, report: &Report) -> Result<String> {
    let mut out = format!("# liralab {}\n", env!("CARGO_PKG_VERSION"));
    for line in toml::to_string(settings)?.lines() {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    if let Some(summary) = &report.summary {
        out.push_str("# summary: ");
        out.push_str(&csv_line(summary.columns.iter().cloned())?);
        for row in &summary.rows {
            out.push_str("# ");
            out.push_str(&csv_line(row.iter().map(Cell::render))?);
        }
    }
    out.push_str(&csv_line(report.rows.columns.iter().cloned())?);
    for row in &report.rows.rows {
        out.push_str(&csv_line(row.iter().map(Cell::render))?);
    }
    Ok(out)
}

fn render_json(settings: &Settings, report: &Report) -> Result<String> {
    #[derive(Serialize)]
    struct Doc<'a> {
        config: &'a Settings,
        #[serde(skip_serializing_if = "Option::is_none")]
        summary: Option<Records<'a>>,
        rows: Records<'a>,
    }
    let doc = Doc {
        config: settings,
        summary: report.summary.as_ref().map(Records),
        rows: Records(&report.rows),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Writes `text` to `path` through a temporary sibling file and a rename, so
/// a failed run never leaves a partial file behind.
pub fn write_atomically(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| -> Result<()> {
        let mut f = std::fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
