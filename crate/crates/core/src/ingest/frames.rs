use std::io::{BufRead, Write};
use std::path::Path;

use super::{check_malformed, open, IngestError, Parsed, Rejected};

const SOURCE: &str = "obstruction frames";

pub const GRID_SIZE: usize = 123;
pub const CELL_COUNT: usize = GRID_SIZE * GRID_SIZE;
/// Stored value of a cell the dish has no data for. Any negative raw value
/// is read as unknown and normalized to this.
pub const UNKNOWN_CELL: f32 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameType {
    /// North-up, zenith-centred.
    Earth,
    /// Boresight-centred with the panel forward edge at the bottom.
    Ut,
}

impl FrameType {
    pub fn as_str(&self) -> &'static str {
        match self {
            FrameType::Earth => "FRAME_EARTH",
            FrameType::Ut => "FRAME_UT",
        }
    }

    /// Accepts the enum names and their protobuf numbers (1, 2).
    pub fn parse(s: &str) -> Option<FrameType> {
        match s.trim() {
            "FRAME_EARTH" | "1" => Some(FrameType::Earth),
            "FRAME_UT" | "2" => Some(FrameType::Ut),
            _ => None,
        }
    }
}

/// One obstruction map snapshot, cells in row-major order with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionFrame {
    pub timestamp: f64,
    pub frame_type: FrameType,
    pub cells: Vec<f32>,
}

impl ObstructionFrame {
    pub fn unexplored(timestamp: f64, frame_type: FrameType) -> Self {
        ObstructionFrame { timestamp, frame_type, cells: vec![UNKNOWN_CELL; CELL_COUNT] }
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.cells[row * GRID_SIZE + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f32) {
        self.cells[row * GRID_SIZE + col] = v;
    }
}

fn parse_record(line: &str) -> Result<ObstructionFrame, String> {
    let mut fields = line.split(',');
    let ts = fields.next().unwrap_or("").trim();
    let timestamp: f64 = ts.parse().map_err(|_| format!("invalid timestamp '{ts}'"))?;
    if !timestamp.is_finite() {
        return Err("non-finite timestamp".into());
    }
    let ft = fields.next().unwrap_or("");
    let frame_type = FrameType::parse(ft).ok_or_else(|| format!("unknown frame_type '{ft}'"))?;
    let mut cells = Vec::with_capacity(CELL_COUNT);
    for (i, f) in fields.enumerate() {
        let v: f32 = f.trim().parse().map_err(|_| format!("cell {i}: invalid value '{f}'"))?;
        if v.is_nan() || v > 1.0 {
            return Err(format!("cell {i}: value {v} outside [0,1]"));
        }
        cells.push(if v < 0.0 { UNKNOWN_CELL } else { v });
    }
    if cells.len() != CELL_COUNT {
        return Err(format!("expected {CELL_COUNT} cells, found {}", cells.len()));
    }
    Ok(ObstructionFrame { timestamp, frame_type, cells })
}

/// Parses a frame dump (one frame per line). Records are sorted by timestamp
/// and, for equal timestamps, the one appearing last in the file is kept.
/// Rejections carry the 1-based record index.
pub fn read_obstruction_frames<R: BufRead>(reader: R) -> Result<Parsed<ObstructionFrame>, IngestError> {
    let mut parsed = Parsed::empty();
    let mut total = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Format { source_name: SOURCE.into(), message: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if i == 0 && trimmed.starts_with(|c: char| c.is_ascii_alphabetic()) {
            // optional header row
            continue;
        }
        total += 1;
        match parse_record(trimmed) {
            Ok(f) => parsed.records.push(f),
            Err(reason) => {
                log::warn!("{SOURCE}: rejecting record {total}: {reason}");
                parsed.rejected.push(Rejected { line: total, reason });
            }
        }
    }
    check_malformed(SOURCE, &parsed.rejected, total)?;
    // stable sort keeps file order among equal timestamps
    parsed.records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    super::status::dedup_keep_last(&mut parsed.records, |f| f.timestamp);
    Ok(parsed)
}

pub fn parse_obstruction_frames(path: &Path) -> Result<Parsed<ObstructionFrame>, IngestError> {
    read_obstruction_frames(open(path)?)
}

pub fn write_obstruction_frames<W: Write>(mut w: W, frames: &[ObstructionFrame]) -> std::io::Result<()> {
    let mut line = String::with_capacity(CELL_COUNT * 4);
    for f in frames {
        line.clear();
        line.push_str(&f.timestamp.to_string());
        line.push(',');
        line.push_str(f.frame_type.as_str());
        for &v in &f.cells {
            line.push(',');
            if v < 0.0 {
                line.push_str("-1");
            } else {
                line.push_str(&v.to_string());
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(ts: &str, ft: &str, n: usize) -> String {
        let mut s = format!("{ts},{ft}");
        for i in 0..n {
            s.push_str(if i % 7 == 0 { ",0.93" } else { ",-1" });
        }
        s
    }

    #[test]
    fn accepts_ut_frame() {
        let input = record("10.5", "FRAME_UT", CELL_COUNT);
        let p = read_obstruction_frames(input.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].frame_type, FrameType::Ut);
        assert_eq!(p.records[0].cells[0], 0.93);
        assert_eq!(p.records[0].cells[1], UNKNOWN_CELL);
    }

    #[test]
    fn short_record_rejected_by_index() {
        let mut input = String::new();
        for i in 0..10 {
            input.push_str(&record(&i.to_string(), "1", CELL_COUNT));
            input.push('\n');
        }
        input.push_str(&record("11", "FRAME_EARTH", CELL_COUNT - 1));
        let p = read_obstruction_frames(input.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 10);
        assert_eq!(p.rejected[0].line, 11);
        assert!(p.rejected[0].reason.contains("15128"));
    }

    #[test]
    fn unknown_frame_type_rejected() {
        assert!(parse_record(&record("1", "FRAME_SKY", CELL_COUNT)).is_err());
    }

    #[test]
    fn duplicate_timestamps_keep_last() {
        let a = record("5", "FRAME_EARTH", CELL_COUNT);
        let b = record("5", "FRAME_UT", CELL_COUNT);
        let p = read_obstruction_frames(format!("{a}\n{b}\n").as_bytes()).unwrap();
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].frame_type, FrameType::Ut);
    }

    #[test]
    fn negative_values_normalized() {
        let mut s = record("1", "FRAME_EARTH", CELL_COUNT - 1);
        s.push_str(",-0.25");
        let f = parse_record(&s).unwrap();
        assert_eq!(f.cells[CELL_COUNT - 1], UNKNOWN_CELL);
    }
}
