use std::io::{Read, Write};
use std::path::Path;

use super::status::dedup_keep_last;
use super::{open, read_csv_log, IngestError, Parsed, Row};

const SOURCE: &str = "location log";

const COLUMNS: [&str; 7] =
    ["timestamp", "latitude", "longitude", "altitude_meters", "horizontal_speed_mps", "vertical_speed_mps", "source"];

const REQUIRED: [&str; 5] = ["timestamp", "latitude", "longitude", "altitude_meters", "source"];

/// Unix time of the GPS epoch, 1980-01-06T00:00:00Z.
const GPS_EPOCH_UNIX: f64 = 315_964_800.0;

/// Unix times at which GPS-UTC grew by one second, in order. The index plus
/// one is the offset in force from that instant.
const LEAP_SECONDS_UNIX: [f64; 18] = [
    362_793_600.0,   // 1981-07-01
    394_329_600.0,   // 1982-07-01
    425_865_600.0,   // 1983-07-01
    489_024_000.0,   // 1985-07-01
    567_993_600.0,   // 1988-01-01
    631_152_000.0,   // 1990-01-01
    662_688_000.0,   // 1991-01-01
    709_948_800.0,   // 1992-07-01
    741_484_800.0,   // 1993-07-01
    773_020_800.0,   // 1994-07-01
    820_454_400.0,   // 1996-01-01
    867_715_200.0,   // 1997-07-01
    915_148_800.0,   // 1999-01-01
    1_136_073_600.0, // 2006-01-01
    1_230_768_000.0, // 2009-01-01
    1_341_100_800.0, // 2012-07-01
    1_435_708_800.0, // 2015-07-01
    1_483_228_800.0, // 2017-01-01
];

fn offset_at_unix(unix: f64) -> f64 {
    LEAP_SECONDS_UNIX.iter().take_while(|&&t| t <= unix).count() as f64
}

/// Converts GPS seconds to Unix seconds using the bundled leap-second table.
pub fn gps_to_unix(gps: f64) -> f64 {
    let mut offset = 0.0;
    for (i, &t) in LEAP_SECONDS_UNIX.iter().enumerate() {
        let n = (i + 1) as f64;
        // GPS reading at the instant the n-th leap second took effect
        if gps >= t - GPS_EPOCH_UNIX + n {
            offset = n;
        }
    }
    gps - (offset - GPS_EPOCH_UNIX)
}

pub fn unix_to_gps(unix: f64) -> f64 {
    unix + (offset_at_unix(unix) - GPS_EPOCH_UNIX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationSource {
    /// Dish GNSS receiver; timestamps are in GPS seconds on disk.
    DishGnss,
    /// External receiver logged in Unix seconds.
    ExternalGps,
}

impl LocationSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocationSource::DishGnss => "DISH_GNSS",
            LocationSource::ExternalGps => "EXTERNAL_GPS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DISH_GNSS" | "GNSS" => Some(LocationSource::DishGnss),
            "EXTERNAL_GPS" | "EXTERNAL" => Some(LocationSource::ExternalGps),
            _ => None,
        }
    }
}

/// One position fix. The timestamp is always Unix seconds in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct UtLocationRecord {
    pub timestamp: f64,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
    pub horizontal_speed_mps: f64,
    pub vertical_speed_mps: f64,
    pub source: LocationSource,
}

fn parse_row(row: &Row) -> Result<UtLocationRecord, String> {
    let source =
        LocationSource::parse(row.raw("source")).ok_or_else(|| format!("unknown source '{}'", row.raw("source")))?;
    let raw_t = row.f64("timestamp")?;
    let timestamp = match source {
        LocationSource::DishGnss => gps_to_unix(raw_t),
        LocationSource::ExternalGps => raw_t,
    };
    let latitude = row.f64("latitude")?;
    let longitude = row.f64("longitude")?;
    let altitude_m = row.f64("altitude_meters")?;
    if latitude.abs() > 90.0 {
        return Err(format!("latitude {latitude} out of range"));
    }
    if !(-180.0..180.0).contains(&longitude) {
        return Err(format!("longitude {longitude} out of range"));
    }
    if !(-500.0..=10_000.0).contains(&altitude_m) {
        return Err(format!("altitude {altitude_m} out of range"));
    }
    Ok(UtLocationRecord {
        timestamp,
        latitude,
        longitude,
        altitude_m,
        horizontal_speed_mps: row.opt_f64("horizontal_speed_mps")?.unwrap_or(0.0),
        vertical_speed_mps: row.opt_f64("vertical_speed_mps")?.unwrap_or(0.0),
        source,
    })
}

pub fn read_location_log<R: Read>(reader: R) -> Result<Parsed<UtLocationRecord>, IngestError> {
    let mut parsed = read_csv_log(reader, SOURCE, &REQUIRED, parse_row)?;
    parsed.records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    dedup_keep_last(&mut parsed.records, |r| r.timestamp);
    Ok(parsed)
}

pub fn parse_location_log(path: &Path) -> Result<Parsed<UtLocationRecord>, IngestError> {
    read_location_log(open(path)?)
}

/// Writes records in their on-disk time base (GPS seconds for the dish receiver).
pub fn write_location_log<W: Write>(mut w: W, records: &[UtLocationRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for r in records {
        let t = match r.source {
            LocationSource::DishGnss => unix_to_gps(r.timestamp),
            LocationSource::ExternalGps => r.timestamp,
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            t,
            r.latitude,
            r.longitude,
            r.altitude_m,
            r.horizontal_speed_mps,
            r.vertical_speed_mps,
            r.source.as_str()
        )?;
    }
    Ok(())
}
