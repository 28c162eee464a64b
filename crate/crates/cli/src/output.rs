//! Tables and their CSV and JSON encodings.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Result of one command: a fixed header, rows, and solver metadata.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `solver.*` settings that were not user-configurable.
    pub metadata: Vec<(String, String)>,
    /// Points that failed; the rest of the table is still written.
    pub failures: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), ..Table::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((format!("solver.{key}"), value.to_string()));
    }
}

fn header_pairs(cfg: &RunConfig, table: &Table) -> Vec<(String, String)> {
    let mut out = vec![
        ("command".to_string(), cfg.command.name().to_string()),
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
    ];
    out.extend(cfg.entries().iter().cloned());
    out.extend(table.metadata.iter().cloned());
    out
}

pub fn render(cfg: &RunConfig, table: &Table) -> Result<Vec<u8>, CliError> {
    let pairs = header_pairs(cfg, table);
    match cfg.format()? {
        Format::Csv => {
            let mut buf = Vec::new();
            for (k, v) in &pairs {
                writeln!(buf, "# {k}={v}").expect("write to memory");
            }
            for f in &table.failures {
                writeln!(buf, "# failed: {f}").expect("write to memory");
            }
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
            let io = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record(&table.columns).map_err(io)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => {
            let config: Map<String, Value> = pairs.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = json!({ "config": config, "result": rows, "failures": table.failures });
            let mut buf = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

pub fn write(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            std::io::stdout().lock().write_all(bytes).map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
