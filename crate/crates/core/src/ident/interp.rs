//! Time interpolation of attitude and position telemetry.

use crate::geometry::Observer;
use crate::ingest::{UtLocationRecord, UtStatusRecord};
use crate::orientation::{Attitude, HeadingSource};
use crate::vector::wrap_deg_360;

/// Samples further apart than this are not interpolated across.
pub const DEFAULT_MAX_GAP_S: f64 = 2.0;

fn bracket<T>(samples: &[(f64, T)], t: f64, max_gap: f64) -> Option<(usize, usize, f64)> {
    let i = samples.partition_point(|(ts, _)| *ts <= t);
    if i == 0 {
        return None;
    }
    let a = i - 1;
    if samples[a].0 == t {
        return Some((a, a, 0.0));
    }
    let b = i;
    if b >= samples.len() {
        return None;
    }
    let (ta, tb) = (samples[a].0, samples[b].0);
    if tb - ta > max_gap {
        return None;
    }
    Some((a, b, (t - ta) / (tb - ta)))
}

fn lerp_angle_deg(a: f64, b: f64, f: f64) -> f64 {
    let d = (b - a + 540.0).rem_euclid(360.0) - 180.0;
    wrap_deg_360(a + d * f)
}

/// Dish attitude as a function of time.
#[derive(Debug, Clone, Default)]
pub struct AttitudeTrack {
    samples: Vec<(f64, Attitude)>,
    max_gap_s: f64,
}

impl AttitudeTrack {
    /// Records without a usable attitude are left out.
    pub fn new(status: &[UtStatusRecord], max_gap_s: f64) -> Self {
        let samples = status
            .iter()
            .filter_map(|r| match Attitude::from_status(r) {
                Ok(a) => Some((r.timestamp, a)),
                Err(e) => {
                    log::debug!("no attitude at t={}: {e}", r.timestamp);
                    None
                }
            })
            .collect();
        AttitudeTrack { samples, max_gap_s }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Slerp between quaternion-derived samples, otherwise linear in tilt and
    /// heading. `None` outside the covered span or across a gap.
    pub fn at(&self, t: f64) -> Option<Attitude> {
        let (a, b, f) = bracket(&self.samples, t, self.max_gap_s)?;
        let (sa, sb) = (&self.samples[a].1, &self.samples[b].1);
        if a == b {
            return Some(*sa);
        }
        if sa.heading.source == HeadingSource::Quaternion && sb.heading.source == HeadingSource::Quaternion {
            let q = sa.quaternion.slerp(&sb.quaternion, f);
            Attitude::from_quaternion(&q).ok()
        } else {
            let tilt = sa.tilt_deg + (sb.tilt_deg - sa.tilt_deg) * f;
            let heading = lerp_angle_deg(sa.heading.heading_deg, sb.heading.heading_deg, f);
            Attitude::from_tilt_heading(tilt, heading).ok()
        }
    }
}

/// Dish position as a function of time.
#[derive(Debug, Clone, Default)]
pub struct LocationTrack {
    samples: Vec<(f64, (f64, f64, f64))>,
    max_gap_s: f64,
}

impl LocationTrack {
    pub fn new(records: &[UtLocationRecord], max_gap_s: f64) -> Self {
        LocationTrack {
            samples: records.iter().map(|r| (r.timestamp, (r.latitude, r.longitude, r.altitude_m))).collect(),
            max_gap_s,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn at(&self, t: f64) -> Option<Observer> {
        let (a, b, f) = bracket(&self.samples, t, self.max_gap_s)?;
        let (la, oa, ha) = self.samples[a].1;
        let (lb, ob, hb) = self.samples[b].1;
        let lon = lerp_angle_deg(oa, ob, f);
        let lon = if lon >= 180.0 { lon - 360.0 } else { lon };
        Some(Observer::new(la + (lb - la) * f, lon, ha + (hb - ha) * f))
    }
}
