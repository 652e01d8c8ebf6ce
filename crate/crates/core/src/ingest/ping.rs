use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use super::{check_malformed, open, read_csv_log, IngestError, Parsed, Rejected, Row};

const SOURCE: &str = "ping log";
const COLUMNS: [&str; 4] = ["response_timestamp", "sequence", "rtt_ms", "lost"];
const MAX_BACKWARD_SKEW_S: f64 = 1.0;

/// One echo request outcome. Lost samples have `rtt_ms == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PingSample {
    pub response_timestamp: f64,
    pub sequence: u64,
    pub rtt_ms: f64,
    pub lost: bool,
}

fn parse_csv_row(row: &Row) -> Result<PingSample, String> {
    let lost = row.bool("lost")?;
    let rtt_ms = if lost { row.opt_f64("rtt_ms")?.unwrap_or(0.0) } else { row.f64("rtt_ms")? };
    if !lost && rtt_ms <= 0.0 {
        return Err(format!("non-positive rtt {rtt_ms} on a received reply"));
    }
    let seq = row.i64("sequence")?;
    if seq < 0 {
        return Err(format!("negative sequence {seq}"));
    }
    Ok(PingSample { response_timestamp: row.f64("response_timestamp")?, sequence: seq as u64, rtt_ms, lost })
}

fn field_after<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let start = line.find(key)? + key.len();
    let rest = &line[start..];
    let end = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
    Some(&rest[..end])
}

/// Parses one `ping -D` output line. `Ok(None)` for lines that are not about a
/// particular sequence number (banner, statistics).
fn parse_text_line(line: &str) -> Result<Option<PingSample>, String> {
    let Some(seq) = field_after(line, "icmp_seq=") else {
        return Ok(None);
    };
    let sequence: u64 = seq.parse().map_err(|_| format!("invalid icmp_seq '{seq}'"))?;
    let ts = line.strip_prefix('[').and_then(|l| l.split(']').next()).ok_or("missing [timestamp] prefix")?;
    let response_timestamp: f64 = ts.parse().map_err(|_| format!("invalid timestamp '{ts}'"))?;
    match field_after(line, "time=") {
        Some(t) => {
            let rtt_ms: f64 = t.parse().map_err(|_| format!("invalid time '{t}'"))?;
            if rtt_ms <= 0.0 {
                return Err(format!("non-positive rtt {rtt_ms}"));
            }
            Ok(Some(PingSample { response_timestamp, sequence, rtt_ms, lost: false }))
        }
        None => Ok(Some(PingSample { response_timestamp, sequence, rtt_ms: 0.0, lost: true })),
    }
}

fn read_text<R: BufRead>(reader: R) -> Result<Parsed<PingSample>, IngestError> {
    let mut parsed = Parsed::empty();
    let mut total = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::Format { source_name: SOURCE.into(), message: e.to_string() })?;
        match parse_text_line(line.trim()) {
            Ok(Some(s)) => {
                total += 1;
                parsed.records.push(s);
            }
            Ok(None) => {}
            Err(reason) => {
                total += 1;
                parsed.rejected.push(Rejected { line: i + 1, reason });
            }
        }
    }
    check_malformed(SOURCE, &parsed.rejected, total)?;
    Ok(parsed)
}

/// Reads either the CSV form or raw `ping -D` output, detected from the first
/// non-blank line.
///
/// Missing sequence numbers between two observed ones become lost samples at
/// linearly interpolated times. A timestamp more than 1 s earlier than one
/// already seen is fatal; smaller jitter is sorted out.
pub fn read_ping_log<R: BufRead>(mut reader: R) -> Result<Parsed<PingSample>, IngestError> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| IngestError::Format { source_name: SOURCE.into(), message: e.to_string() })?;
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let parsed = if first.trim_start().starts_with("response_timestamp") || first.contains(",sequence") {
        read_csv_log(text.as_bytes(), SOURCE, &COLUMNS, parse_csv_row)?
    } else {
        read_text(text.as_bytes())?
    };

    let mut max_t = f64::NEG_INFINITY;
    for (i, s) in parsed.records.iter().enumerate() {
        if !s.lost && s.response_timestamp < max_t - MAX_BACKWARD_SKEW_S {
            return Err(IngestError::NonMonotonic {
                source_name: SOURCE.into(),
                line: i + 1,
                skew_s: max_t - s.response_timestamp,
            });
        }
        if !s.lost {
            max_t = max_t.max(s.response_timestamp);
        }
    }

    // first occurrence of each sequence number wins (duplicates are DUP! replies)
    let mut by_seq: BTreeMap<u64, PingSample> = BTreeMap::new();
    for s in parsed.records {
        by_seq.entry(s.sequence).or_insert(s);
    }
    let mut records: Vec<PingSample> = Vec::with_capacity(by_seq.len());
    let mut prev: Option<&PingSample> = None;
    for s in by_seq.values() {
        if let Some(p) = prev {
            let span = s.sequence - p.sequence;
            let dt = (s.response_timestamp - p.response_timestamp) / span as f64;
            for k in 1..span {
                records.push(PingSample {
                    response_timestamp: p.response_timestamp + dt * k as f64,
                    sequence: p.sequence + k,
                    rtt_ms: 0.0,
                    lost: true,
                });
            }
        }
        records.push(s.clone());
        prev = Some(s);
    }
    records.sort_by(|a, b| a.response_timestamp.total_cmp(&b.response_timestamp));
    Ok(Parsed { records, rejected: parsed.rejected })
}

pub fn parse_ping_log(path: &Path) -> Result<Parsed<PingSample>, IngestError> {
    read_ping_log(open(path)?)
}

pub fn write_ping_log<W: Write>(mut w: W, samples: &[PingSample]) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for s in samples {
        writeln!(w, "{},{},{},{}", s.response_timestamp, s.sequence, s.rtt_ms, s.lost)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_reply_line() {
        let line = "[1748736012.100000] 64 bytes from 8.8.8.8: icmp_seq=100 ttl=117 time=42.1 ms";
        let s = parse_text_line(line).unwrap().unwrap();
        assert_eq!(s.sequence, 100);
        assert_eq!(s.rtt_ms, 42.1);
        assert!(!s.lost);
    }

    #[test]
    fn missing_sequence_synthesized() {
        let text = "PING 8.8.8.8 (8.8.8.8) 56(84) bytes of data.\n\
            [10.00] 64 bytes from 8.8.8.8: icmp_seq=100 ttl=117 time=42.1 ms\n\
            [10.02] 64 bytes from 8.8.8.8: icmp_seq=102 ttl=117 time=40.0 ms\n";
        let p = read_ping_log(text.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 3);
        assert_eq!(p.records[1].sequence, 101);
        assert!(p.records[1].lost);
        assert!((p.records[1].response_timestamp - 10.01).abs() < 1e-9);
    }

    #[test]
    fn csv_form() {
        let text = "response_timestamp,sequence,rtt_ms,lost\n1.0,1,30.5,false\n1.01,2,,true\n";
        let p = read_ping_log(text.as_bytes()).unwrap();
        assert_eq!(p.records.len(), 2);
        assert!(p.records[1].lost);
    }

    #[test]
    fn empty_file() {
        assert!(read_ping_log("".as_bytes()).unwrap().records.is_empty());
    }

    #[test]
    fn large_backward_skew_is_fatal() {
        let text = "response_timestamp,sequence,rtt_ms,lost\n10.0,1,30,false\n8.5,2,30,false\n";
        assert!(matches!(read_ping_log(text.as_bytes()), Err(IngestError::NonMonotonic { .. })));
        let ok = "response_timestamp,sequence,rtt_ms,lost\n10.0,1,30,false\n9.5,2,30,false\n";
        let p = read_ping_log(ok.as_bytes()).unwrap();
        assert!(p.records[0].response_timestamp <= p.records[1].response_timestamp);
    }
}
