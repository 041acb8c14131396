//! Curve files: one curve per row, one grid point per column, comma
//! separated, with an optional header row.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use ecc_core::curves::FunctionalSample;

use crate::error::{CliError, Result};

const OP: &str = "parse_curve_file";

/// Reads a curve file from disk.
pub fn parse_curve_file(path: &Path) -> Result<FunctionalSample> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::parse(OP, format!("{}: {e}", path.display())))?;
    parse_curves(&text).map_err(|e| match e {
        CliError::Parse { operation, message } => CliError::Parse {
            operation,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Parses curve-file contents. The first row is taken as a header when any
/// of its cells is not a number. Row numbers in errors count lines of the
/// file from 1, header included.
pub fn parse_curves(text: &str) -> Result<FunctionalSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::parse(OP, e.to_string()))?;
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if i == 0 && record.iter().any(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(CliError::parse(
                OP,
                format!("row {line}: expected {w} columns, found {}", record.len()),
            ));
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(CliError::parse(
                    OP,
                    format!("row {line}, column {}: non-finite value {cell:?}", j + 1),
                )),
                Err(_) => Err(CliError::parse(
                    OP,
                    format!("row {line}, column {}: not a number: {cell:?}", j + 1),
                )),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(OP, "empty input: no curves found"));
    }
    FunctionalSample::from_rows(rows).map_err(CliError::core(OP))
}

/// Writes `s` as a headerless curve file. Values use the shortest
/// representation that reads back to the same `f64`.
pub fn write_curves<W: Write>(s: &FunctionalSample, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in s {
        w.write_record(c.values().iter().map(|v| v.to_string()))?;
    }
    w.flush()
}

pub fn write_curve_file(s: &FunctionalSample, path: &Path) -> Result<()> {
    let f = File::create(path)
        .map_err(|e| CliError::internal("write_curve_file", format!("{}: {e}", path.display())))?;
    write_curves(s, io::BufWriter::new(f)).map_err(|e| CliError::internal("write_curve_file", e))
}
