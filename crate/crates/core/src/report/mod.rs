//! Byte-stable report output: CSV (comma, minimal quoting, LF) and JSON.
//!
//! Percentages print with 2 decimals, fractions with 4, other reals in
//! shortest round-trip form.

mod analyze;
mod heatmap;
mod routing;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value};

pub use analyze::{analyze, AnalysisOutput, Which};
pub use heatmap::render_heatmap_svg;
pub use routing::{RoutingDetails, RoutingResultsTable, RoutingSummary};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(usize),
    /// Percentage or percentage points.
    Pct(f64),
    /// Fraction in [0, 1] or a correlation.
    Frac(f64),
    Real(f64),
    Empty,
}

fn fixed(x: f64, places: usize) -> String {
    let s = format!("{x:.places$}");
    // no "-0.00"
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Pct(x) => fixed(*x, 2),
            Cell::Frac(x) => fixed(*x, 4),
            Cell::Real(x) => x.to_string(),
            Cell::Empty => String::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(n) => Value::from(*n),
            Cell::Empty => Value::Null,
            Cell::Real(x) => number(*x),
            Cell::Pct(_) | Cell::Frac(_) => {
                number(self.render().parse().expect("formatted float parses"))
            }
        }
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Array of objects keyed by column name, in column order.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Anything that can be written as a report file.
pub trait Report {
    fn table(&self) -> Table;

    fn json(&self) -> Value {
        self.table().to_json()
    }

    fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.table().to_csv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json())?;
                s.push('\n');
                Ok(s)
            }
        }
    }
}

impl Report for Table {
    fn table(&self) -> Table {
        self.clone()
    }
}

pub fn persist_report(report: &dyn Report, path: &Path, format: Format) -> Result<()> {
    std::fs::write(path, report.render(format)?)?;
    Ok(())
}
