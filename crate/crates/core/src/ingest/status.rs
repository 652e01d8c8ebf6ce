use std::io::{Read, Write};
use std::path::Path;

use super::{open, opt_cell, read_csv_log, IngestError, Parsed, Row};
use crate::orientation::Quaternion;

const SOURCE: &str = "status log";

/// Allowed deviation of the reported quaternion norm from 1.
pub const QUATERNION_NORM_TOLERANCE: f64 = 1e-3;

const COLUMNS: [&str; 16] = [
    "timestamp",
    "hardware_version",
    "pop_ping_latency_ms",
    "downlink_throughput_bps",
    "uplink_throughput_bps",
    "tilt_angle_deg",
    "boresight_azimuth_deg",
    "boresight_elevation_deg",
    "attitude_estimation_state",
    "attitude_uncertainty_deg",
    "desired_boresight_azimuth_deg",
    "desired_boresight_elevation_deg",
    "q_scalar",
    "q_x",
    "q_y",
    "q_z",
];

const REQUIRED: [&str; 2] = ["timestamp", "hardware_version"];

/// One dish status sample.
#[derive(Debug, Clone, PartialEq)]
pub struct UtStatusRecord {
    /// Unix seconds.
    pub timestamp: f64,
    pub hardware_model: String,
    pub pop_ping_latency_ms: Option<f64>,
    pub downlink_bps: Option<f64>,
    pub uplink_bps: Option<f64>,
    pub tilt_deg: Option<f64>,
    pub boresight_azimuth_deg: Option<f64>,
    pub boresight_elevation_deg: Option<f64>,
    pub attitude_estimation_state: Option<i64>,
    pub attitude_uncertainty_deg: Option<f64>,
    pub desired_boresight_azimuth_deg: Option<f64>,
    pub desired_boresight_elevation_deg: Option<f64>,
    pub quaternion: Option<Quaternion>,
    /// Quaternion present but its norm is off by more than the tolerance.
    pub degraded: bool,
}

impl UtStatusRecord {
    /// A record with only the timestamp and model set.
    pub fn bare(timestamp: f64, hardware_model: &str) -> Self {
        UtStatusRecord {
            timestamp,
            hardware_model: hardware_model.to_string(),
            pop_ping_latency_ms: None,
            downlink_bps: None,
            uplink_bps: None,
            tilt_deg: None,
            boresight_azimuth_deg: None,
            boresight_elevation_deg: None,
            attitude_estimation_state: None,
            attitude_uncertainty_deg: None,
            desired_boresight_azimuth_deg: None,
            desired_boresight_elevation_deg: None,
            quaternion: None,
            degraded: false,
        }
    }

    /// Sets the quaternion and recomputes the degraded flag.
    pub fn with_quaternion(mut self, q: Option<Quaternion>) -> Self {
        self.degraded = q.is_some_and(|q| (q.norm() - 1.0).abs() > QUATERNION_NORM_TOLERANCE);
        self.quaternion = q;
        self
    }

    /// The normalized quaternion, if present and not degraded.
    pub fn valid_quaternion(&self) -> Option<Quaternion> {
        if self.degraded {
            return None;
        }
        self.quaternion.and_then(|q| q.normalized().ok())
    }
}

fn parse_row(row: &Row) -> Result<UtStatusRecord, String> {
    let quaternion = match (row.opt_f64("q_scalar")?, row.opt_f64("q_x")?, row.opt_f64("q_y")?, row.opt_f64("q_z")?) {
        (Some(w), Some(x), Some(y), Some(z)) => Some(Quaternion::new(w, x, y, z)),
        (None, None, None, None) => None,
        _ => return Err("partial quaternion".into()),
    };
    let attitude_estimation_state = match row.raw("attitude_estimation_state") {
        "" => None,
        _ => Some(row.i64("attitude_estimation_state")?),
    };
    let rec = UtStatusRecord {
        timestamp: row.f64("timestamp")?,
        hardware_model: row.raw("hardware_version").to_string(),
        pop_ping_latency_ms: row.opt_f64("pop_ping_latency_ms")?,
        downlink_bps: row.opt_f64("downlink_throughput_bps")?,
        uplink_bps: row.opt_f64("uplink_throughput_bps")?,
        tilt_deg: row.opt_f64("tilt_angle_deg")?,
        boresight_azimuth_deg: row.opt_f64("boresight_azimuth_deg")?,
        boresight_elevation_deg: row.opt_f64("boresight_elevation_deg")?,
        attitude_estimation_state,
        attitude_uncertainty_deg: row.opt_f64("attitude_uncertainty_deg")?,
        desired_boresight_azimuth_deg: row.opt_f64("desired_boresight_azimuth_deg")?,
        desired_boresight_elevation_deg: row.opt_f64("desired_boresight_elevation_deg")?,
        quaternion: None,
        degraded: false,
    }
    .with_quaternion(quaternion);
    if rec.degraded {
        log::warn!("{SOURCE}: quaternion norm off at t={}", rec.timestamp);
    }
    Ok(rec)
}

/// Parses a status log, returning records in strictly increasing timestamp
/// order. Repeated timestamps keep the last record.
pub fn read_status_log<R: Read>(reader: R) -> Result<Parsed<UtStatusRecord>, IngestError> {
    let mut parsed = read_csv_log(reader, SOURCE, &REQUIRED, parse_row)?;
    parsed.records.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    dedup_keep_last(&mut parsed.records, |r| r.timestamp);
    Ok(parsed)
}

pub fn parse_status_log(path: &Path) -> Result<Parsed<UtStatusRecord>, IngestError> {
    read_status_log(open(path)?)
}

pub fn write_status_log<W: Write>(mut w: W, records: &[UtStatusRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for r in records {
        let q = r.quaternion;
        let cells = [
            r.timestamp.to_string(),
            r.hardware_model.clone(),
            opt_cell(r.pop_ping_latency_ms),
            opt_cell(r.downlink_bps),
            opt_cell(r.uplink_bps),
            opt_cell(r.tilt_deg),
            opt_cell(r.boresight_azimuth_deg),
            opt_cell(r.boresight_elevation_deg),
            r.attitude_estimation_state.map(|s| s.to_string()).unwrap_or_default(),
            opt_cell(r.attitude_uncertainty_deg),
            opt_cell(r.desired_boresight_azimuth_deg),
            opt_cell(r.desired_boresight_elevation_deg),
            opt_cell(q.map(|q| q.w)),
            opt_cell(q.map(|q| q.x)),
            opt_cell(q.map(|q| q.y)),
            opt_cell(q.map(|q| q.z)),
        ];
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Removes runs of equal keys from a sorted vector, keeping the last of each.
pub(crate) fn dedup_keep_last<T>(v: &mut Vec<T>, key: impl Fn(&T) -> f64) {
    let mut out: Vec<T> = Vec::with_capacity(v.len());
    for item in v.drain(..) {
        if out.last().is_some_and(|last| key(last) == key(&item)) {
            out.pop();
        }
        out.push(item);
    }
    *v = out;
}
