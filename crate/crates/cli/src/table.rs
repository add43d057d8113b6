//! The run CSV schema: fixed header, one row per logged iteration.
//!
//! Integer columns (`t`, `grad_evals`, `inner_iters`) are written as plain
//! integers; real columns use 17 significant digits so two runs can be
//! compared byte for byte. Cells for metrics that were not evaluated are
//! empty.

use std::io::{Read, Write};

use pmqsopt::driver::LogRow;
use thiserror::Error;

pub const COLUMNS: [&str; 10] = [
    "t",
    "grad_evals",
    "objective",
    "feasibility",
    "lambda_norm",
    "r_kkt_sq",
    "r_cons",
    "r_comp_abs",
    "inner_iters",
    "subproblem_residual",
];

const INTEGER_COLUMNS: [usize; 3] = [0, 1, 8];

/// Columns a slope report may be fitted on.
pub const RESIDUAL_COLUMNS: [&str; 3] = ["r_kkt_sq", "r_cons", "r_comp_abs"];

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unexpected header {found:?}; expected {}", COLUMNS.join(","))]
    Header { found: Vec<String> },
    #[error("row {row}: {reason}")]
    Cell { row: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<[Option<f64>; 10]>,
}

pub fn column_index(name: &str) -> Option<usize> {
    COLUMNS.iter().position(|c| *c == name)
}

pub fn row_from_log(row: &LogRow) -> [Option<f64>; 10] {
    let avg = row.averages;
    [
        Some(row.t as f64),
        Some(row.grad_evals as f64),
        Some(row.objective),
        Some(row.feasibility),
        Some(row.lambda_norm),
        avg.map(|a| a.r_kkt_sq),
        avg.map(|a| a.r_cons),
        avg.map(|a| a.r_comp_abs),
        Some(row.inner_iters as f64),
        Some(row.subproblem_residual),
    ]
}

fn format_cell(col: usize, v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(v) if INTEGER_COLUMNS.contains(&col) && v.fract() == 0.0 && v.abs() < 9.0e15 => {
            format!("{}", v as i64)
        }
        Some(v) => format!("{v:.16e}"),
    }
}

impl Table {
    pub fn from_log(rows: &[LogRow]) -> Self {
        Self {
            rows: rows.iter().map(row_from_log).collect(),
        }
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), TableError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.iter().enumerate().map(|(c, v)| format_cell(c, *v)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    /// Parses a CSV in the run schema. The header must match exactly.
    pub fn read<R: Read>(input: R) -> Result<Self, TableError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != COLUMNS {
            return Err(TableError::Header { found: header });
        }
        let mut rows = Vec::new();
        for (idx, record) in r.records().enumerate() {
            let record = record?;
            let mut row = [None; 10];
            for (c, cell) in record.iter().enumerate() {
                let cell = cell.trim();
                if cell.is_empty() {
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| TableError::Cell {
                    row: idx + 1,
                    reason: format!("column `{}`: cannot parse `{cell}`", COLUMNS[c]),
                })?;
                row[c] = Some(v);
            }
            if row[0].is_none() {
                return Err(TableError::Cell {
                    row: idx + 1,
                    reason: "missing `t`".into(),
                });
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn from_csv_str(text: &str) -> Result<Self, TableError> {
        Self::read(text.as_bytes())
    }

    /// `(t, value)` pairs of a column, skipping empty cells.
    pub fn series(&self, col: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| Some((r[0]?, r[col]?)))
            .collect()
    }
}

/// Cellwise mean across tables whose `t` columns agree row for row.
///
/// A cell is empty if it is empty in any input. Returns `None` when the
/// tables do not align.
pub fn aggregate(tables: &[&Table]) -> Option<Table> {
    let first = tables.first()?;
    if tables.iter().any(|t| {
        t.rows.len() != first.rows.len()
            || t.rows.iter().zip(&first.rows).any(|(a, b)| a[0] != b[0])
    }) {
        return None;
    }
    let k = tables.len() as f64;
    let rows = (0..first.rows.len())
        .map(|i| {
            let mut row = [None; 10];
            row[0] = first.rows[i][0];
            for (c, cell) in row.iter_mut().enumerate().skip(1) {
                let vals: Option<Vec<f64>> = tables.iter().map(|t| t.rows[i][c]).collect();
                *cell = vals.map(|v| v.iter().sum::<f64>() / k);
            }
            row
        })
        .collect();
    Some(Table { rows })
}
