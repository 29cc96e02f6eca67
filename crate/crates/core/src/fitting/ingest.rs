use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, Trim};

use super::{ConfidenceDataset, FitError};

/// Default floor for zero or tiny probabilities.
pub const DEFAULT_CLAMP: f64 = 1e-6;
/// Largest accepted deviation of a row sum from 1 without renormalization.
pub const SUM_TOLERANCE: f64 = 1e-3;

/// Reads a confidence CSV file: header `p0,...,p{K-1}`, one probability
/// vector per line, `#` comment lines ignored.
///
/// Components below `clamp` are raised to it. With `renormalize`, adjusted
/// rows and rows whose sum is off are rescaled to sum to 1; without it a
/// row sum off by more than [`SUM_TOLERANCE`] is an error.
pub fn ingest_csv(path: &Path, clamp: f64, renormalize: bool) -> Result<ConfidenceDataset, FitError> {
    let file = File::open(path).map_err(|source| FitError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_confidence_csv(file, &path.display().to_string(), clamp, renormalize)
}

/// As [`ingest_csv`], from any reader.
pub fn read_confidence_csv<R: Read>(
    reader: R,
    source: &str,
    clamp: f64,
    renormalize: bool,
) -> Result<ConfidenceDataset, FitError> {
    if !(0.0..1.0).contains(&clamp) {
        return Err(FitError::Invalid(format!("clamp={clamp} must lie in [0, 1)")));
    }
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header_line = |rdr: &csv::Reader<R>| rdr.position().line();
    let header = rdr
        .headers()
        .map_err(|e| FitError::Line {
            line: e.position().map_or(1, |p| p.line()),
            message: format!("unreadable header: {e}"),
        })?
        .clone();
    let k = header.len();
    let expected: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
    if k < 2 || header.iter().zip(&expected).any(|(h, e)| h != e) {
        return Err(FitError::Line {
            line: header_line(&rdr).max(1),
            message: format!(
                "header must be p0,p1,...,p{{K-1}} with K ≥ 2, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    let mut adjusted_lines = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| FitError::Line {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |message: String| FitError::Line { line, message };
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != k {
            return Err(err(format!("expected {k} values, found {}", record.len())));
        }
        let mut row = Vec::with_capacity(k);
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| err(format!("column p{col}: `{field}` is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(format!("column p{col}: {v} is outside [0, 1]")));
            }
            row.push(v);
        }
        let sum: f64 = row.iter().sum();
        let off = (sum - 1.0).abs() > SUM_TOLERANCE;
        if off && !renormalize {
            return Err(err(format!("row sums to {sum}, off from 1 by more than {SUM_TOLERANCE}")));
        }
        let mut changed = off;
        for x in row.iter_mut() {
            if *x < clamp {
                *x = clamp;
                changed = true;
            }
        }
        if changed {
            if renormalize {
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|x| *x /= s);
            }
            adjusted_lines.push(line);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FitError::Invalid(format!("{source}: no data rows")));
    }
    Ok(ConfidenceDataset {
        k,
        rows,
        label: None,
        source: source.to_string(),
        adjusted_lines,
    })
}
