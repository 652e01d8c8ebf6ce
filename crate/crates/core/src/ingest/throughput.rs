use std::io::{Read, Write};
use std::path::Path;

use super::{open, read_csv_log, IngestError, Parsed, Row};

const SOURCE: &str = "throughput log";
const COLUMNS: [&str; 3] = ["timestamp", "direction", "bps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Down => "DOWN",
            Direction::Up => "UP",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s.to_ascii_uppercase().as_str() {
            "DOWN" | "DL" | "DOWNLINK" => Some(Direction::Down),
            "UP" | "UL" | "UPLINK" => Some(Direction::Up),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSample {
    pub timestamp: f64,
    pub direction: Direction,
    pub bps: f64,
}

fn parse_row(row: &Row) -> Result<ThroughputSample, String> {
    let direction = Direction::parse(row.raw("direction"))
        .ok_or_else(|| format!("unknown direction '{}'", row.raw("direction")))?;
    let bps = row.f64("bps")?;
    if bps < 0.0 {
        return Err(format!("negative throughput {bps}"));
    }
    Ok(ThroughputSample { timestamp: row.f64("timestamp")?, direction, bps })
}

pub fn read_throughput_log<R: Read>(reader: R) -> Result<Parsed<ThroughputSample>, IngestError> {
    let mut parsed = read_csv_log(reader, SOURCE, &COLUMNS, parse_row)?;
    parsed.records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(parsed)
}

pub fn parse_throughput_log(path: &Path) -> Result<Parsed<ThroughputSample>, IngestError> {
    read_throughput_log(open(path)?)
}

pub fn write_throughput_log<W: Write>(mut w: W, samples: &[ThroughputSample]) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for s in samples {
        writeln!(w, "{},{},{}", s.timestamp, s.direction.as_str(), s.bps)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_sorts() {
        let text = "timestamp,direction,bps\n2,UP,1e6\n1,DOWN,2.5e8\n";
        let p = read_throughput_log(text.as_bytes()).unwrap();
        assert_eq!(p.records[0].direction, Direction::Down);
        assert_eq!(p.records[1].bps, 1e6);
    }

    #[test]
    fn negative_rejected() {
        let text = format!("timestamp,direction,bps\n1,DOWN,-3\n{}", "1,UP,3\n".repeat(10));
        let p = read_throughput_log(text.as_bytes()).unwrap();
        assert_eq!(p.rejected.len(), 1);
    }
}
