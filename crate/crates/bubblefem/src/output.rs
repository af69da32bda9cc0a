//! Rendering of command results as aligned text, CSV or JSON.
//!
//! Numbers go to CSV with 17 significant digits and to JSON through
//! `serde_json`'s shortest round-trip form, so identical inputs give
//! byte-identical files.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Numeric value printed with three decimals in the text format.
    Rounded(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) | Cell::Rounded(v) => format!("{v:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => csv_quote(s),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.6e}"),
            Cell::Rounded(v) => format!("{v:.3}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(true) => "pass".into(),
            Cell::Bool(false) => "FAIL".into(),
            Cell::Missing => "-".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) | Cell::Rounded(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Rounded(_) | Cell::Missing => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Columns shown only in the text format.
    pub text_only: Vec<usize>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            text_only: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Numeric value of `column` in every row, `None` for non-numeric cells.
    pub fn column(&self, column: &str) -> Vec<Option<f64>> {
        let Some(k) = self.columns.iter().position(|c| c == column) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| match r[k] {
                Cell::Num(v) | Cell::Rounded(v) => Some(v),
                _ => None,
            })
            .collect()
    }

    fn visible(&self, format: Format) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|k| format == Format::Table || !self.text_only.contains(k))
            .collect()
    }
}

/// Result of one command: tables plus free-form notes. Notes appear in the
/// text and JSON forms only, keeping CSV machine-readable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
            Format::Table => self.text(),
        }
    }

    fn csv(&self) -> String {
        let mut out = String::new();
        for (i, table) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let cols = table.visible(Format::Csv);
            let header: Vec<String> = cols.iter().map(|&k| csv_quote(&table.columns[k])).collect();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in &table.rows {
                let line: Vec<String> = cols.iter().map(|&k| row[k].csv()).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        out
    }

    fn json(&self) -> String {
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|t| {
                let cols = t.visible(Format::Json);
                let rows: Vec<Value> = t
                    .rows
                    .iter()
                    .map(|r| {
                        let mut obj = Map::new();
                        for &k in &cols {
                            obj.insert(t.columns[k].clone(), r[k].json());
                        }
                        Value::Object(obj)
                    })
                    .collect();
                json!({ "name": t.name, "rows": rows })
            })
            .collect();
        let doc = json!({ "tables": tables, "notes": self.notes });
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
        s.push('\n');
        s
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for table in &self.tables {
            let cols = table.visible(Format::Table);
            let cells: Vec<Vec<String>> =
                table.rows.iter().map(|r| cols.iter().map(|&k| r[k].text()).collect()).collect();
            let widths: Vec<usize> = cols
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    cells.iter().map(|r| r[i].len()).chain([table.columns[k].len()]).max().unwrap_or(0)
                })
                .collect();
            let _ = writeln!(out, "{}", table.name);
            let header: Vec<String> =
                cols.iter().zip(&widths).map(|(&k, &w)| format!("{:>w$}", table.columns[k])).collect();
            let _ = writeln!(out, "{}", header.join("  "));
            for row in &cells {
                let line: Vec<String> = row.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
                let _ = writeln!(out, "{}", line.join("  "));
            }
            out.push('\n');
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut t = Table::new("demo", &["x", "label", "ok", "r"]);
        t.push(vec![Cell::Num(0.1), "a,b".into(), true.into(), Cell::Rounded(0.12345)]);
        t.push(vec![Cell::Missing, "c".into(), false.into(), Cell::Rounded(1.0)]);
        t.text_only.push(3);
        Report { tables: vec![t], notes: vec!["hello".into()] }
    }

    #[test]
    fn csv_layout() {
        let csv = sample().render(Format::Csv);
        assert_eq!(csv, "x,label,ok\n1.0000000000000001e-1,\"a,b\",true\n,c,false\n");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let v = std::f64::consts::PI / 7.0;
        let s = Cell::Num(v).csv();
        assert_eq!(s.parse::<f64>().unwrap(), v);
    }

    #[test]
    fn json_layout() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json)).unwrap();
        assert_eq!(v["tables"][0]["rows"][0]["x"], json!(0.1));
        assert_eq!(v["tables"][0]["rows"][1]["x"], Value::Null);
        assert!(v["tables"][0]["rows"][0].get("r").is_none());
        assert_eq!(v["notes"][0], "hello");
    }

    #[test]
    fn text_layout() {
        let text = sample().render(Format::Table);
        assert!(text.contains("0.123"));
        assert!(text.contains("FAIL"));
        assert!(text.ends_with("note: hello\n"));
    }
}
