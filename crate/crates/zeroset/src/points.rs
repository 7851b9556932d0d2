//! Point lists as headerless CSV (one point per row) and projection results
//! as CSV with a header.

use std::fs::File;
use std::path::Path;

use zeroset_core::ProjectionStatus;

use crate::json::fmt_f64;
use crate::FormatError;

/// Reads rows of exactly `d` reals. Blank lines are skipped; anything else
/// that does not parse is reported with its line number.
pub fn read_points(path: &Path, d: usize) -> Result<Vec<Vec<f64>>, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FormatError::csv(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != d {
            return Err(FormatError::Invalid(format!(
                "{}: line {line}: expected {d} values, found {}",
                path.display(),
                record.len()
            )));
        }
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    FormatError::Invalid(format!("{}: line {line}: `{field}` is not a finite number", path.display()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        points.push(row);
    }
    Ok(points)
}

pub fn write_points(path: &Path, points: &[Vec<f64>]) -> Result<(), FormatError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(|e| FormatError::csv(path, e))?;
    for p in points {
        writer.write_record(p.iter().map(|&v| fmt_f64(v))).map_err(|e| FormatError::csv(path, e))?;
    }
    writer.flush().map_err(|e| FormatError::io(path, e))
}

/// One projected seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionRow {
    pub limit: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub status: ProjectionStatus,
}

/// Header `x0..x{d-1},residual,iterations,status`, then one row per seed.
pub fn write_projections(path: &Path, d: usize, rows: &[ProjectionRow]) -> Result<(), FormatError> {
    let wrap = |e| FormatError::csv(path, e);
    let mut writer = csv::Writer::from_path(path).map_err(wrap)?;
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    header.extend(["residual", "iterations", "status"].map(String::from));
    writer.write_record(&header).map_err(wrap)?;
    for row in rows {
        let mut fields: Vec<String> = row.limit.iter().map(|&v| fmt_f64(v)).collect();
        fields.push(fmt_f64(row.residual));
        fields.push(row.iterations.to_string());
        fields.push(row.status.as_str().to_string());
        writer.write_record(&fields).map_err(wrap)?;
    }
    writer.flush().map_err(|e| FormatError::io(path, e))
}
