//! Numeric CSV tables: one header row, then numbers.
//!
//! Floats are written in shortest round-trip exponent form (`{:e}`), so a
//! table read back is bit-identical to the one written.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    /// Columns printed as integers.
    pub integer: Vec<bool>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        let integer = vec![false; columns.len()];
        Self { columns, integer, rows: Vec::new() }
    }

    pub fn with_integer_columns(mut self, names: &[&str]) -> Self {
        for (c, flag) in self.columns.iter().zip(self.integer.iter_mut()) {
            *flag = names.contains(&c.as_str());
        }
        self
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::Parse(format!("missing column '{name}'")))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().zip(&self.integer).map(|(x, int)| format_cell(*x, *int)))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads any table written by [`Table::write`]; integer columns come back as floats.
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let mut table = Table::new(columns);
        for (line, record) in r.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("{}: row {}: '{cell}' is not a number", path.display(), line + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != table.columns.len() {
                return Err(Error::Parse(format!("{}: row {} has {} cells", path.display(), line + 1, row.len())));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

fn format_cell(x: f64, integer: bool) -> String {
    if integer && x.fract() == 0.0 && x.abs() < 9.0e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:e}")
    }
}
