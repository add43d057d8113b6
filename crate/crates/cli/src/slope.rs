//! Power-law slope reports on residual columns of run CSVs.

use std::fs;
use std::path::{Path, PathBuf};

use pmqsopt::metrics::{fit_power_law, PowerLawFit};

use crate::error::{CliError, CliResult};
use crate::table::{column_index, Table, RESIDUAL_COLUMNS};

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub column: String,
    pub fit: PowerLawFit,
    /// Selected `(t, value)` points sorted by `t`.
    pub points: Vec<(f64, f64)>,
}

impl SlopeReport {
    /// `c·t^{-1/4}` through the first selected point.
    pub fn reference(&self, t: f64) -> f64 {
        let (t0, v0) = self.points[0];
        v0 * (t0 / t).powf(0.25)
    }

    /// Columns `t,value,fit,reference`.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("t,value,fit,reference\n");
        for &(t, v) in &self.points {
            out.push_str(&format!(
                "{t:.16e},{v:.16e},{:.16e},{:.16e}\n",
                self.fit.predict(t),
                self.reference(t)
            ));
        }
        out
    }
}

/// Fits `column` over the pooled rows of `tables` with `t` in
/// `[t_min, t_max]`.
pub fn slope_from_tables(
    tables: &[Table],
    column: &str,
    t_min: Option<f64>,
    t_max: Option<f64>,
) -> CliResult<SlopeReport> {
    if !RESIDUAL_COLUMNS.contains(&column) {
        return Err(CliError::Usage(format!(
            "column `{column}` is not a residual column; available: {}",
            RESIDUAL_COLUMNS.join(", ")
        )));
    }
    let col = column_index(column).expect("residual columns are in the schema");
    let lo = t_min.unwrap_or(f64::NEG_INFINITY);
    let hi = t_max.unwrap_or(f64::INFINITY);
    let mut points: Vec<(f64, f64)> = tables
        .iter()
        .flat_map(|t| t.series(col))
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .collect();
    if points.is_empty() {
        return Err(CliError::Usage(format!(
            "no `{column}` values with t in [{lo}, {hi}]"
        )));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let fit = fit_power_law(&points)?;
    Ok(SlopeReport {
        column: column.to_string(),
        fit,
        points,
    })
}

pub fn slope_from_files(
    paths: &[PathBuf],
    column: &str,
    t_min: Option<f64>,
    t_max: Option<f64>,
) -> CliResult<SlopeReport> {
    if paths.is_empty() {
        return Err(CliError::Usage("no CSV files given".into()));
    }
    let tables = paths
        .iter()
        .map(|p| {
            let f = fs::File::open(p).map_err(|e| CliError::io(p, e))?;
            Table::read(f).map_err(CliError::from)
        })
        .collect::<CliResult<Vec<_>>>()?;
    slope_from_tables(&tables, column, t_min, t_max)
}

pub fn curve_file_name(column: &str) -> String {
    format!("slope_{column}.csv")
}

pub fn write_curve(report: &SlopeReport, out: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join(curve_file_name(&report.column));
    fs::write(&path, report.curve_csv()).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
