//! Homogeneous record tables written as CSV or JSON.

use std::io::Write;

use clap::ValueEnum;
use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidInput(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
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

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidInput(format!(
                "row of {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }
}

/// `re_<name>, im_<name>`.
pub fn complex_columns(name: &str) -> [String; 2] {
    [format!("re_{name}"), format!("im_{name}")]
}

/// `re_<p>_11, im_<p>_11, re_<p>_12, …` in row-major order, 1-based.
pub fn matrix_columns(prefix: &str, r: usize) -> Vec<String> {
    (0..r * r)
        .flat_map(|k| complex_columns(&format!("{prefix}_{}{}", k / r + 1, k % r + 1)))
        .collect()
}

pub fn complex_cells(z: Complex64) -> [Cell; 2] {
    [Cell::Num(z.re), Cell::Num(z.im)]
}

pub fn matrix_cells(m: &CMat) -> Vec<Cell> {
    m.as_slice().iter().flat_map(|&z| complex_cells(z)).collect()
}

/// C `%.12e`: mantissa with 12 decimals and a signed exponent of at least
/// two digits.
pub fn format_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent in LowerExp output");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(x) => format_e12(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
        Cell::Int(i) => Value::from(*i),
        Cell::Bool(b) => Value::from(*b),
        Cell::Text(s) => Value::from(s.as_str()),
    }
}

pub fn write_table(t: &Table, format: Format, out: &mut dyn Write) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", t.columns.join(","))?;
            for row in &t.rows {
                writeln!(out, "{}", row.iter().map(csv_cell).collect::<Vec<_>>().join(","))?;
            }
        }
        Format::Json => {
            let arr: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    let m: Map<String, Value> = t.columns.iter().cloned().zip(row.iter().map(json_cell)).collect();
                    Value::Object(m)
                })
                .collect();
            serde_json::to_writer_pretty(&mut *out, &arr).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn table_bytes(t: &Table, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_table(t, format, &mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(format_e12(0.0), "0.000000000000e+00");
        assert_eq!(format_e12(1.5), "1.500000000000e+00");
        assert_eq!(format_e12(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(format_e12(6.02e123), "6.020000000000e+123");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(["x", "F2"]);
        assert_eq!(table_bytes(&t, Format::Csv).unwrap(), b"x,F2\n");
        assert_eq!(table_bytes(&t, Format::Json).unwrap(), b"[]\n");
    }

    #[test]
    fn matrix_column_order() {
        let cols = matrix_columns("b", 2);
        assert_eq!(cols[..4], ["re_b_11", "im_b_11", "re_b_12", "im_b_12"]);
        assert_eq!(cols.len(), 8);
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new(["z", "a"]);
        t.push(vec![1.0.into(), "q".into()]).unwrap();
        let s = String::from_utf8(table_bytes(&t, Format::Json).unwrap()).unwrap();
        assert!(s.find("\"z\"").unwrap() < s.find("\"a\"").unwrap());
        assert!(t.push(vec![1.0.into()]).is_err());
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = Table::new(["note"]);
        t.push(vec!["a,b".into()]).unwrap();
        assert_eq!(table_bytes(&t, Format::Csv).unwrap(), b"note\n\"a,b\"\n");
    }
}
