//! Parsers and writers for every input artifact.
//!
//! Each parser returns its records sorted by timestamp together with the lines
//! it had to skip. Tabular logs carry a header row naming their columns; the
//! column order in the file does not matter. A log where more than
//! [`MAX_MALFORMED_FRACTION`] of the data lines are malformed is rejected
//! outright since that usually means the schema changed.

mod frames;
mod location;
mod outage;
mod ping;
mod status;
mod throughput;
mod tle;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use frames::{
    parse_obstruction_frames, read_obstruction_frames, write_obstruction_frames, FrameType, ObstructionFrame,
    CELL_COUNT, GRID_SIZE, UNKNOWN_CELL,
};
pub use location::{
    gps_to_unix, parse_location_log, read_location_log, unix_to_gps, write_location_log, LocationSource,
    UtLocationRecord,
};
pub use outage::{parse_outage_log, read_outage_log, write_outage_log, OutageCause, OutageEvent};
pub use ping::{parse_ping_log, read_ping_log, write_ping_log, PingSample};
pub use status::{parse_status_log, read_status_log, write_status_log, UtStatusRecord};
pub use throughput::{parse_throughput_log, read_throughput_log, write_throughput_log, Direction, ThroughputSample};
pub(crate) use tle::days_from_civil;
pub use tle::{parse_tle_catalog, read_tle_catalog, tle_checksum, tle_epoch_unix, write_tle_catalog, TleRecord};

/// Fraction of malformed data lines above which a log is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{source_name}: missing required column '{column}'")]
    MissingColumn { source_name: String, column: String },
    #[error("{source_name}: {malformed} of {total} lines malformed (lines {lines:?})")]
    TooManyMalformed { source_name: String, malformed: usize, total: usize, lines: Vec<usize> },
    #[error("{source_name}: timestamp at line {line} goes back {skew_s:.3} s")]
    NonMonotonic { source_name: String, line: usize, skew_s: f64 },
    #[error("{source_name}: {message}")]
    Format { source_name: String, message: String },
}

/// A skipped input line and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    /// 1-based line number (or record index for frame dumps).
    pub line: usize,
    pub reason: String,
}

/// Records accepted from one input plus what was skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejected: Vec<Rejected>,
}

impl<T> Parsed<T> {
    pub fn empty() -> Self {
        Parsed { records: Vec::new(), rejected: Vec::new() }
    }
}

pub(crate) fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path).map(BufReader::new).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

pub(crate) fn check_malformed(source_name: &str, rejected: &[Rejected], total: usize) -> Result<(), IngestError> {
    if total > 0 && rejected.len() as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(IngestError::TooManyMalformed {
            source_name: source_name.to_string(),
            malformed: rejected.len(),
            total,
            lines: rejected.iter().map(|r| r.line).collect(),
        });
    }
    Ok(())
}

/// One data row of a headed CSV log, with fields looked up by column name.
pub(crate) struct Row<'a> {
    record: &'a csv::StringRecord,
    columns: &'a BTreeMap<String, usize>,
}

impl Row<'_> {
    pub fn raw(&self, name: &str) -> &str {
        self.columns.get(name).and_then(|&i| self.record.get(i)).map(str::trim).unwrap_or("")
    }

    pub fn f64(&self, name: &str) -> Result<f64, String> {
        let s = self.raw(name);
        let v: f64 = s.parse().map_err(|_| format!("{name}: invalid number '{s}'"))?;
        if !v.is_finite() {
            return Err(format!("{name}: non-finite value"));
        }
        Ok(v)
    }

    pub fn opt_f64(&self, name: &str) -> Result<Option<f64>, String> {
        if self.raw(name).is_empty() {
            Ok(None)
        } else {
            self.f64(name).map(Some)
        }
    }

    pub fn i64(&self, name: &str) -> Result<i64, String> {
        let s = self.raw(name);
        s.parse().map_err(|_| format!("{name}: invalid integer '{s}'"))
    }

    pub fn bool(&self, name: &str) -> Result<bool, String> {
        match self.raw(name).to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(format!("{name}: invalid boolean '{other}'")),
        }
    }
}

/// Reads a headed CSV log and maps each data row through `parse_row`.
///
/// Rows that fail are collected as [`Rejected`]; the malformed ceiling is
/// enforced before returning.
pub(crate) fn read_csv_log<R: Read, T>(
    reader: R,
    source_name: &str,
    required: &[&str],
    mut parse_row: impl FnMut(&Row) -> Result<T, String>,
) -> Result<Parsed<T>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let fmt_err = |e: csv::Error| IngestError::Format { source_name: source_name.to_string(), message: e.to_string() };
    let headers = rdr.headers().map_err(fmt_err)?.clone();
    if headers.is_empty() {
        return Ok(Parsed::empty());
    }
    let columns: BTreeMap<String, usize> = headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
    for col in required {
        if !columns.contains_key(*col) {
            return Err(IngestError::MissingColumn { source_name: source_name.to_string(), column: col.to_string() });
        }
    }

    let mut parsed = Parsed::empty();
    let mut total = 0;
    for result in rdr.records() {
        total += 1;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(total + 1);
                parsed.rejected.push(Rejected { line, reason: e.to_string() });
                continue;
            }
        };
        let line = record.position().map(|p| p.line() as usize).unwrap_or(total + 1);
        if record.len() != headers.len() {
            parsed
                .rejected
                .push(Rejected { line, reason: format!("expected {} fields, found {}", headers.len(), record.len()) });
            continue;
        }
        match parse_row(&Row { record: &record, columns: &columns }) {
            Ok(v) => parsed.records.push(v),
            Err(reason) => parsed.rejected.push(Rejected { line, reason }),
        }
    }
    for r in &parsed.rejected {
        log::warn!("{source_name}: skipping line {}: {}", r.line, r.reason);
    }
    check_malformed(source_name, &parsed.rejected, total)?;
    Ok(parsed)
}

/// Formats an optional float cell; `None` becomes an empty cell.
pub(crate) fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_ceiling() {
        let rows = "a,b\n1,2\nx,3\n4,5\n6,7\n8,9\n10,11\n12,13\n14,15\n16,17\n18,19\n";
        let parsed = read_csv_log(rows.as_bytes(), "t", &["a", "b"], |r| r.f64("a")).unwrap();
        assert_eq!(parsed.records.len(), 9);
        assert_eq!(parsed.rejected[0].line, 3);

        let bad = "a,b\n1,2\nx,3\ny,4\n";
        match read_csv_log(bad.as_bytes(), "t", &["a"], |r| r.f64("a")) {
            Err(IngestError::TooManyMalformed { lines, .. }) => assert_eq!(lines, vec![3, 4]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_fatal() {
        let rows = "a\n1\n";
        assert!(matches!(
            read_csv_log(rows.as_bytes(), "t", &["b"], |r| r.f64("a")),
            Err(IngestError::MissingColumn { .. })
        ));
    }

    #[test]
    fn empty_input_is_empty() {
        let parsed = read_csv_log("".as_bytes(), "t", &["a"], |r| r.f64("a")).unwrap();
        assert!(parsed.records.is_empty());
    }
}
