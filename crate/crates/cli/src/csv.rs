//! Minimal CSV table: one `#` metadata line, a column row, then numbers.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
}

impl Cell {
    pub fn value(self) -> f64 {
        match self {
            Cell::Float(x) => x,
            Cell::Int(i) => i as f64,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub metadata: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(metadata: String, columns: &[&str]) -> Self {
        Table {
            metadata,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i].value()).collect())
    }

    /// Floats carry 17 significant digits, which round-trips every `f64`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# {}", self.metadata).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Float(x) => write!(out, "{x:.16e}").unwrap(),
                    Cell::Int(k) => write!(out, "{k}").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Reads back a rendered table. Every cell comes back as a float.
    pub fn parse(text: &str) -> CliResult<Table> {
        let mut lines = text.lines();
        let bad = |line: usize, what: &str| CliError::Config(format!("CSV line {line}: {what}"));
        let metadata = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| bad(1, "expected `# ` metadata line"))?
            .to_string();
        let columns: Vec<String> = lines
            .next()
            .ok_or_else(|| bad(2, "missing column row"))?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|s| s.parse::<f64>().map(Cell::Float))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(i + 3, &e.to_string()))?;
            if row.len() != columns.len() {
                return Err(bad(i + 3, "wrong number of cells"));
            }
            rows.push(row);
        }
        Ok(Table { metadata, columns, rows })
    }
}
