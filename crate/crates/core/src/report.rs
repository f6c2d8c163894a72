//! Report emission: JSON with every float printed to 17 significant digits,
//! and CSV tables.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// A float with 17 significant digits.
pub fn float(x: f64) -> String {
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

/// Pretty JSON of `value`; non-finite floats become null.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::InvalidParameter(format!("unserializable report: {e}")))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&float(x)),
                    _ => out.push_str("null"),
                }
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // flat numeric arrays stay on one line
            if items.iter().all(|x| x.is_number()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(indent + 1, out);
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let n = map.len();
            for (i, (k, x)) in map.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < n { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// A CSV table whose float cells use [`float`].
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub enum Cell {
    Text(String),
    Number(f64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
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

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        let cells = row
            .into_iter()
            .map(|c| match c {
                Cell::Text(s) => quote(&s),
                Cell::Number(x) => float(x),
                Cell::Empty => String::new(),
            })
            .collect();
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(-2.0), "-2.0000000000000000e0");
        let json = to_json(&serde_json::json!({"a": 0.5, "n": 3, "v": [1.0, 2.5]})).unwrap();
        assert!(json.contains("\"a\": 5.0000000000000000e-1"));
        assert!(json.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["v"][1].as_f64(), Some(2.5));
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = CsvTable::new(&["id", "x"]);
        t.push(vec!["a,b".into(), 1.0.into()]);
        assert_eq!(t.render(), "id,x\n\"a,b\",1.0000000000000000e0\n");
    }
}
