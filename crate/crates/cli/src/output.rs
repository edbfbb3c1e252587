//! Table emission: CSV with fixed headers (`.` decimals, `,` separator, LF
//! endings) and a JSON mirror carrying the same fields per row. Non-finite
//! numbers print as `NaN`/`inf` in CSV and become `null` in JSON.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v}"),
            Cell::Int(v) => format!("{v}"),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Float(v) => {
                if v.is_finite() {
                    serde_json::json!(v)
                } else {
                    serde_json::Value::Null
                }
            }
            Cell::Int(v) => serde_json::json!(v),
            Cell::Text(v) => serde_json::json!(v),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub boundary: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, boundary: &str, header: Vec<&'static str>) -> Self {
        Table {
            command,
            boundary: boundary.to_string(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.header.iter().zip(row) {
                    obj.insert(name.to_string(), cell.json());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "command": self.command,
            "boundary": self.boundary,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("static document serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &Path, json: bool) -> std::io::Result<()> {
        let body = if json { self.to_json() } else { self.to_csv() };
        std::fs::write(path, body)
    }
}
