//! CSV and JSON rendering of command reports.
//!
//! Output depends only on the report contents: JSON objects have sorted keys
//! and CSV floats always carry 17 significant digits.

use serde_json::{Map, Value};
use std::fmt::Write as _;

pub const SCHEMA_VERSION: u64 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => float_csv(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

fn float_csv(v: f64) -> String {
    if v.is_finite() {
        // Adding zero folds -0 into +0.
        format!("{:.16e}", v + 0.0)
    } else {
        v.to_string()
    }
}

fn value_csv(v: &Value) -> String {
    match v {
        Value::Number(n) if !n.is_i64() && !n.is_u64() => float_csv(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(value_csv).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything one command emits: run metadata, scalar summary and a table.
#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Map<String, Value>,
    pub summary: Map<String, Value>,
    pub table: Table,
}

impl Report {
    pub fn new(command: &'static str, d: usize, lambda: f64, seed: u64) -> Self {
        let mut meta = Map::new();
        meta.insert("tool".into(), "treewave".into());
        meta.insert("version".into(), TOOL_VERSION.into());
        meta.insert("command".into(), command.into());
        meta.insert("d".into(), d.into());
        meta.insert("lambda".into(), lambda.into());
        meta.insert("seed".into(), seed.into());
        Self {
            meta,
            summary: Map::new(),
            table: Table::default(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.into(), value.into());
    }

    pub fn summary(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.into(), value.into());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={}", value_csv(v));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k}={}", value_csv(v));
        }
        out.push_str(&self.table.columns.join(","));
        out.push('\n');
        for row in &self.table.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("meta".into(), Value::Object(self.meta.clone()));
        root.insert("summary".into(), Value::Object(self.summary.clone()));
        let rows: Vec<Value> = self
            .table
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_floats_have_17_significant_digits() {
        assert_eq!(float_csv(0.1), "1.0000000000000001e-1");
        assert_eq!(float_csv(-0.5), "-5.0000000000000000e-1");
        assert_eq!(float_csv(f64::NAN), "NaN");
        let parsed: f64 = float_csv(std::f64::consts::PI).parse().unwrap();
        assert_eq!(parsed, std::f64::consts::PI);
    }

    #[test]
    fn report_renders_both_formats() {
        let mut r = Report::new("profile", 3, 0.0, 7);
        r.summary("big_phi", 3.0);
        r.table = Table::new(&["n", "phi"]);
        r.table.push(vec![0usize.into(), 1.0.into()]);
        r.table.push(vec![1usize.into(), 0.0.into()]);
        let csv = r.to_csv();
        assert!(csv.contains("# d=3\n"));
        assert!(csv.contains("# seed=7\n"));
        assert!(csv.contains(&format!("# version={TOOL_VERSION}\n")));
        assert!(csv.ends_with("n,phi\n0,1.0000000000000000e0\n1,0.0000000000000000e0\n"));
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["meta"]["lambda"], 0.0);
        assert_eq!(json["rows"][0]["phi"], 1.0);
        assert_eq!(json["summary"]["big_phi"], 3.0);
    }
}
