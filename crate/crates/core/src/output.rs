//! CSV and JSON report writers.
//!
//! CSV: comma separated, header row, LF endings, floats with 17 significant
//! digits so every value round-trips. JSON documents carry `"schema": 1`.

use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// Lossless float formatting: 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            // serde_json writes non-finite floats as null; keep them readable
            Cell::Float(v) if !v.is_finite() => json!(fmt_f64(*v)),
            Cell::Float(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
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

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (h, c) in self.header.iter().zip(row) {
                        obj.insert(h.clone(), c.json());
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// One JSON document per run: metadata, constants, rows and optional extras.
pub fn json_document(
    subcommand: &str,
    args: &impl Serialize,
    constants: Value,
    table: &Table,
    extra: Option<Value>,
) -> crate::Result<String> {
    let mut doc = json!({
        "schema": SCHEMA_VERSION,
        "run": {
            "program": "flho",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": subcommand,
            "args": serde_json::to_value(args)?,
        },
        "constants": constants,
        "rows": table.to_json_rows(),
    });
    if let Some(Value::Object(extra)) = extra {
        let obj = doc.as_object_mut().expect("document is an object");
        for (k, v) in extra {
            obj.insert(k, v);
        }
    }
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [1.0, 2.5, 1.0 / 3.0, -7.25e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(["index", "energy", "parity"]);
        t.push(vec![0usize.into(), 1.0.into(), "even".into()]);
        t.push(vec![1usize.into(), 2.5.into(), "a,b".into()]);
        assert_eq!(
            t.to_csv(),
            "index,energy,parity\n0,1.0000000000000000e0,even\n1,2.5000000000000000e0,\"a,b\"\n"
        );
    }

    #[test]
    fn json_has_schema() {
        let mut t = Table::new(["x"]);
        t.push(vec![Cell::Float(f64::INFINITY)]);
        let doc = json_document("test", &json!({"a": 1}), json!({}), &t, Some(json!({"extra": true}))).unwrap();
        let v: Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["rows"][0]["x"], "inf");
        assert_eq!(v["extra"], true);
    }
}
