use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt::Display;
use toric_ech::numeric::{format_rational, rational_to_decimal, QuadraticSurd, Rational};

/// Significant digits of every decimal column.
pub const DECIMAL_DIGITS: u32 = 20;

pub const TOOL: &str = concat!("toric-ech ", env!("CARGO_PKG_VERSION"));

/// Everything needed to reproduce an output file: the tool version, the
/// subcommand and its arguments (output location excluded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool: String,
    pub command: String,
    pub argv: Vec<String>,
    pub parameters: Value,
}

impl RunConfig {
    /// Reads the config back from a CSV or JSON output file.
    pub fn from_output(text: &str) -> Result<Self, String> {
        if let Some(line) = text.lines().find_map(|l| l.strip_prefix(CSV_CONFIG_PREFIX)) {
            return serde_json::from_str(line).map_err(|e| format!("bad config line: {e}"));
        }
        let doc: Value = serde_json::from_str(text).map_err(|e| format!("not a toric-ech output file: {e}"))?;
        serde_json::from_value(doc.get("config").cloned().ok_or("no config object")?).map_err(|e| format!("bad config: {e}"))
    }
}

const CSV_CONFIG_PREFIX: &str = "# config: ";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A column; exact columns are followed by a decimal twin named `<name>_decimal`.
pub enum Col {
    Plain(&'static str),
    Exact(&'static str),
}

pub enum Cell {
    Plain(String),
    Exact { exact: String, decimal: String },
}

impl Cell {
    pub fn rat(r: &Rational) -> Self {
        Cell::Exact { exact: format_rational(r), decimal: rational_to_decimal(r, DECIMAL_DIGITS) }
    }

    pub fn surd(s: &QuadraticSurd) -> Self {
        Cell::Exact { exact: s.to_string(), decimal: s.to_decimal(DECIMAL_DIGITS) }
    }

    pub fn empty_exact() -> Self {
        Cell::Exact { exact: String::new(), decimal: String::new() }
    }

    pub fn of(v: impl Display) -> Self {
        Cell::Plain(v.to_string())
    }
}

#[derive(Default)]
pub struct Table {
    pub columns: Vec<Col>,
    pub rows: Vec<Vec<Cell>>,
    pub diagnostics: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<Col>) -> Self {
        Table { columns, rows: Vec::new(), diagnostics: Map::new() }
    }

    pub fn diag(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(v).expect("serializable diagnostic"));
    }

    fn header(&self) -> Vec<String> {
        let mut h = Vec::new();
        for c in &self.columns {
            match c {
                Col::Plain(n) => h.push(n.to_string()),
                Col::Exact(n) => {
                    h.push(n.to_string());
                    h.push(format!("{n}_decimal"));
                }
            }
        }
        h
    }

    fn flat_row(row: &[Cell]) -> Vec<String> {
        let mut out = Vec::new();
        for c in row {
            match c {
                Cell::Plain(s) => out.push(s.clone()),
                Cell::Exact { exact, decimal } => {
                    out.push(exact.clone());
                    out.push(decimal.clone());
                }
            }
        }
        out
    }

    pub fn render(&self, config: &RunConfig, format: Format) -> String {
        let header = self.header();
        match format {
            Format::Csv => {
                let mut out = format!("# {TOOL}\n{CSV_CONFIG_PREFIX}{}\n", serde_json::to_string(config).expect("config"));
                if !self.diagnostics.is_empty() {
                    out.push_str(&format!("# diagnostics: {}\n", Value::Object(self.diagnostics.clone())));
                }
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&header).expect("in-memory csv");
                for row in &self.rows {
                    w.write_record(Self::flat_row(row)).expect("in-memory csv");
                }
                out.push_str(&String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv"));
                out
            }
            Format::Json => {
                let results: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            header.iter().cloned().zip(Self::flat_row(row).into_iter().map(Value::String)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let doc = serde_json::json!({
                    "config": config,
                    "results": results,
                    "diagnostics": Value::Object(self.diagnostics.clone()),
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json");
                s.push('\n');
                s
            }
        }
    }
}
