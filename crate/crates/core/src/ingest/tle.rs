use std::io::{BufRead, Write};
use std::path::Path;

use super::{open, IngestError, Parsed, Rejected};

const SOURCE: &str = "TLE catalog";
const LINE_LEN: usize = 69;

/// One two-line element set with its catalog name.
#[derive(Debug, Clone, PartialEq)]
pub struct TleRecord {
    pub name: String,
    pub norad_id: u32,
    pub line1: String,
    pub line2: String,
    /// Element epoch, Unix seconds.
    pub epoch: f64,
    /// Direct-to-cell unit, never a broadband serving satellite.
    pub is_dtc: bool,
}

impl TleRecord {
    /// Builds a record from raw lines, checking length, checksums and id agreement.
    pub fn from_lines(name: &str, line1: &str, line2: &str) -> Result<TleRecord, String> {
        for (n, line) in [(1, line1), (2, line2)] {
            if line.len() != LINE_LEN || !line.is_ascii() {
                return Err(format!("line {n} is not {LINE_LEN} ASCII characters"));
            }
            if !line.starts_with(&format!("{n} ")) {
                return Err(format!("line {n} has wrong line number"));
            }
            let expected = tle_checksum(line);
            let found = line.as_bytes()[68];
            if found != b'0' + expected {
                return Err(format!("line {n} checksum mismatch: expected {expected}, found '{}'", found as char));
            }
        }
        let id1 = parse_norad(&line1[2..7])?;
        let id2 = parse_norad(&line2[2..7])?;
        if id1 != id2 {
            return Err(format!("catalog numbers differ: {id1} vs {id2}"));
        }
        let epoch = tle_epoch_unix(line1)?;
        let name = name.trim();
        let name = name.strip_prefix("0 ").unwrap_or(name).trim().to_string();
        let name = if name.is_empty() { format!("NORAD-{id1}") } else { name };
        Ok(TleRecord {
            is_dtc: is_dtc_name(&name),
            name,
            norad_id: id1,
            line1: line1.to_string(),
            line2: line2.to_string(),
            epoch,
        })
    }
}

fn parse_norad(field: &str) -> Result<u32, String> {
    match field.trim().parse::<u32>() {
        Ok(id) if id > 0 => Ok(id),
        _ => Err(format!("invalid catalog number '{field}'")),
    }
}

/// True when a whitespace/punctuation-separated token of the name is "DTC".
fn is_dtc_name(name: &str) -> bool {
    name.split(|c: char| !c.is_ascii_alphanumeric()).any(|tok| tok.eq_ignore_ascii_case("DTC"))
}

/// Modulo-10 checksum over the first 68 columns: digits count their value,
/// minus signs count one, everything else zero.
pub fn tle_checksum(line: &str) -> u8 {
    let sum: u32 = line
        .bytes()
        .take(68)
        .map(|b| match b {
            b'0'..=b'9' => (b - b'0') as u32,
            b'-' => 1,
            _ => 0,
        })
        .sum();
    (sum % 10) as u8
}

pub(crate) fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

/// Epoch of line 1 (columns 19-32, `YYDDD.DDDDDDDD`) as Unix seconds.
pub fn tle_epoch_unix(line1: &str) -> Result<f64, String> {
    let field = line1.get(18..32).ok_or("line 1 too short for epoch")?;
    let yy: i64 = field[..2].trim().parse().map_err(|_| format!("bad epoch year '{field}'"))?;
    let doy: f64 = field[2..].trim().parse().map_err(|_| format!("bad epoch day '{field}'"))?;
    if !(1.0..367.0).contains(&doy) {
        return Err(format!("epoch day {doy} out of range"));
    }
    let year = if yy < 57 { 2000 + yy } else { 1900 + yy };
    let start = days_from_civil(year, 1, 1) as f64 * 86_400.0;
    Ok(start + (doy - 1.0) * 86_400.0)
}

/// Parses a catalog of element sets. A name line is optional; element line
/// pairs are located by their leading line numbers. Sets that fail any check
/// are skipped and reported.
pub fn read_tle_catalog<R: BufRead>(reader: R) -> Result<Parsed<TleRecord>, IngestError> {
    let lines: Vec<String> = reader
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| IngestError::Format { source_name: SOURCE.into(), message: e.to_string() })?;
    let lines: Vec<(usize, &str)> =
        lines.iter().enumerate().map(|(i, l)| (i + 1, l.trim_end())).filter(|(_, l)| !l.is_empty()).collect();

    let mut parsed = Parsed::empty();
    let mut i = 0;
    while i < lines.len() {
        let (n, l) = lines[i];
        if l.starts_with("1 ") && i + 1 < lines.len() && lines[i + 1].1.starts_with("2 ") {
            let name = if i > 0 && !is_element_line(lines[i - 1].1) { lines[i - 1].1 } else { "" };
            match TleRecord::from_lines(name, l, lines[i + 1].1) {
                Ok(rec) => parsed.records.push(rec),
                Err(reason) => {
                    log::warn!("{SOURCE}: skipping set at line {n}: {reason}");
                    parsed.rejected.push(Rejected { line: n, reason });
                }
            }
            i += 2;
        } else {
            if is_element_line(l) {
                let reason = "element line without its partner".to_string();
                log::warn!("{SOURCE}: skipping line {n}: {reason}");
                parsed.rejected.push(Rejected { line: n, reason });
            }
            i += 1;
        }
    }
    Ok(parsed)
}

fn is_element_line(l: &str) -> bool {
    (l.starts_with("1 ") || l.starts_with("2 ")) && l.len() >= 60
}

pub fn parse_tle_catalog(path: &Path) -> Result<Parsed<TleRecord>, IngestError> {
    read_tle_catalog(open(path)?)
}

pub fn write_tle_catalog<W: Write>(mut w: W, records: &[TleRecord]) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}\n{}\n{}", r.name, r.line1, r.line2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Catalog snapshot of a 550 km shell satellite.
    const NAME: &str = "STARLINK-32183";
    const L1: &str = "1 60316U 24134A   25152.50000000  .00001000  00000-0  80000-4 0  9990";
    const L2: &str = "2 60316  53.1600 120.0000 0001200  90.0000 270.0000 15.06000000 12345";

    fn fixed(line: &str) -> String {
        format!("{}{}", &line[..68], tle_checksum(line))
    }

    #[test]
    fn parses_named_set() {
        let (l1, l2) = (fixed(L1), fixed(L2));
        let p = read_tle_catalog(format!("{NAME}\n{l1}\n{l2}\n").as_bytes()).unwrap();
        assert!(p.rejected.is_empty(), "{:?}", p.rejected);
        let r = &p.records[0];
        assert_eq!(r.norad_id, 60316);
        assert_eq!(r.name, NAME);
        assert!(!r.is_dtc);
        // 2025 day 152.5 = 2025-06-01T12:00:00Z
        assert_eq!(r.epoch, 1_748_779_200.0);
    }

    #[test]
    fn corrupted_checksum_skipped() {
        let (l1, l2) = (fixed(L1), fixed(L2));
        let bad_digit = (l2.as_bytes()[68] - b'0' + 1) % 10;
        let l2 = format!("{}{}", &l2[..68], bad_digit);
        let p = read_tle_catalog(format!("{NAME}\n{l1}\n{l2}\n").as_bytes()).unwrap();
        assert!(p.records.is_empty());
        assert!(p.rejected[0].reason.contains("checksum"));
    }

    #[test]
    fn dtc_marker() {
        assert!(is_dtc_name("STARLINK-11350 [DTC]"));
        assert!(is_dtc_name("STARLINK-11350 dtc"));
        assert!(is_dtc_name("STARLINK-DTC-5"));
        assert!(!is_dtc_name("STARLINK-1135"));
        assert!(!is_dtc_name("DTCX-1"));
    }

    #[test]
    fn mismatched_ids_rejected() {
        let l2 = fixed(&L2.replacen("60316", "60317", 1));
        assert!(TleRecord::from_lines(NAME, &fixed(L1), &l2).is_err());
    }

    #[test]
    fn civil_days() {
        assert_eq!(days_from_civil(1970, 1, 1), 0);
        assert_eq!(days_from_civil(2000, 3, 1), 11_017);
    }
}
