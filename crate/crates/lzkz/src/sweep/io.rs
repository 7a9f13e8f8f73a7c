//! Result export and import.
//!
//! CSV files carry the header row, one line per grid point with values at
//! 12 significant digits, and (for fitted curves) a final
//! `fit_alpha,<alpha>,<rms_log_residual>` record. Non-finite values are
//! written the way Rust formats them (`NaN`, `inf`) and parse back. CSV
//! output contains nothing run-dependent, so repeated runs of the same
//! config produce identical bytes.
//!
//! JSON files hold the full result: `{"metadata": ..., "columns": ...,
//! "rows": ...}`, where NaN appears as `null`.

use std::path::Path;

use serde::Deserialize;

use super::{SweepError, SweepMetadata, SweepResult};

/// Canonical number formatting for tables: 12 significant digits in
/// scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{:.11e}", v)
}

pub fn to_csv_string(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(&result.columns.join(","));
    out.push('\n');
    for row in &result.rows {
        let mut first = true;
        for &v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format_value(v));
            first = false;
        }
        out.push('\n');
    }
    if let Some(fit) = &result.metadata.fit {
        out.push_str("fit_alpha,");
        out.push_str(&format_value(fit.alpha));
        out.push(',');
        out.push_str(&format_value(fit.rms_log_residual));
        out.push('\n');
    }
    out
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<(), SweepError> {
    std::fs::write(path, to_csv_string(result)).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json_string(result: &SweepResult) -> Result<String, SweepError> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json(result: &SweepResult, path: &Path) -> Result<(), SweepError> {
    std::fs::write(path, to_json_string(result)?).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Deserialize)]
struct SweepResultRaw {
    metadata: SweepMetadata,
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

pub fn from_json_str(s: &str) -> Result<SweepResult, SweepError> {
    let raw: SweepResultRaw = serde_json::from_str(s)?;
    Ok(SweepResult {
        metadata: raw.metadata,
        columns: raw.columns,
        rows: raw
            .rows
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect(),
    })
}

pub fn read_json(path: &Path) -> Result<SweepResult, SweepError> {
    let s = std::fs::read_to_string(path).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&s)
}

/// A parsed CSV table; metadata does not survive the CSV round trip, only
/// the columns, rows and fit record do.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// `(alpha, rms_log_residual)` from the footer record, when present.
    pub fit: Option<(f64, f64)>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

pub fn from_csv_str(s: &str) -> Result<CsvTable, SweepError> {
    let mut lines = s.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| SweepError::CsvParse {
            line: 1,
            msg: "empty file".into(),
        })?;
    let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    if columns.iter().any(|c| c.is_empty()) {
        return Err(SweepError::CsvParse {
            line: 1,
            msg: "empty column name in header".into(),
        });
    }
    let mut rows = Vec::new();
    let mut fit = None;
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if fit.is_some() {
            return Err(SweepError::CsvParse {
                line: line_no,
                msg: "data after the fit_alpha footer".into(),
            });
        }
        if let Some(rest) = line.strip_prefix("fit_alpha,") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 2 {
                return Err(SweepError::CsvParse {
                    line: line_no,
                    msg: "fit_alpha record needs two values".into(),
                });
            }
            let alpha = parse_float(parts[0], line_no)?;
            let resid = parse_float(parts[1], line_no)?;
            fit = Some((alpha, resid));
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|v| parse_float(v, line_no))
            .collect::<Result<_, _>>()?;
        if values.len() != columns.len() {
            return Err(SweepError::CsvParse {
                line: line_no,
                msg: format!("{} values for {} columns", values.len(), columns.len()),
            });
        }
        rows.push(values);
    }
    Ok(CsvTable { columns, rows, fit })
}

fn parse_float(s: &str, line: usize) -> Result<f64, SweepError> {
    s.trim().parse::<f64>().map_err(|_| SweepError::CsvParse {
        line,
        msg: format!("not a number: {s:?}"),
    })
}

pub fn read_csv(path: &Path) -> Result<CsvTable, SweepError> {
    let s = std::fs::read_to_string(path).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_csv_str(&s)
}
