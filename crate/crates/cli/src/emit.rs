//! Series files. Doubles are written with 17 significant digits so they
//! parse back bit for bit; extended-precision values travel as decimal
//! strings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
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

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Named rectangular data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_f64(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn json_field(c: &Cell) -> String {
    match c {
        Cell::Num(x) if x.is_finite() => format_f64(*x),
        Cell::Num(_) => "null".into(),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => serde_json::Value::String(s.clone()).to_string(),
    }
}

/// Writes `table` to `dir/<name>.<ext>` and returns the path.
pub fn emit_series(dir: &Path, table: &Table, format: Format) -> Result<PathBuf> {
    for (i, row) in table.rows.iter().enumerate() {
        ensure!(
            row.len() == table.columns.len(),
            "{}: row {i} has {} cells for {} columns",
            table.name,
            row.len(),
            table.columns.len()
        );
    }
    let path = dir.join(format!("{}.{}", table.name, format.extension()));
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(csv_field))?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let keys: Vec<String> =
                table.columns.iter().map(|c| serde_json::Value::String(c.clone()).to_string()).collect();
            let mut w = BufWriter::new(file);
            for row in &table.rows {
                let fields: Vec<String> = keys.iter().zip(row).map(|(k, c)| format!("{k}:{}", json_field(c))).collect();
                writeln!(w, "{{{}}}", fields.join(","))?;
            }
            w.flush()?;
        }
    }
    Ok(path)
}
