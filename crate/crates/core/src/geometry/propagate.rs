//! SGP4 propagation and the TEME to Earth-fixed rotation.

use sgp4::{Constants, Elements, MinutesSinceEpoch};

use super::GeometryError;
use crate::ingest::TleRecord;
use crate::vector::Vec3;

/// Largest |t - epoch| accepted by [`Propagator::ecef`].
pub const MAX_PROPAGATION_SPAN_S: f64 = 14.0 * 86_400.0;

/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_146_706_979e-5;

/// Earth-fixed position (m) and velocity (m/s) at a Unix time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcefState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub timestamp: f64,
}

/// Julian date (UT1 taken equal to UTC) of a Unix time.
pub fn julian_date(unix: f64) -> f64 {
    unix / 86_400.0 + 2_440_587.5
}

/// Greenwich mean sidereal time in radians (IAU-82 expression).
pub fn gmst_rad(unix: f64) -> f64 {
    let tut1 = (julian_date(unix) - 2_451_545.0) / 36_525.0;
    let secs = -6.2e-6 * tut1 * tut1 * tut1
        + 0.093_104 * tut1 * tut1
        + (876_600.0 * 3_600.0 + 8_640_184.812_866) * tut1
        + 67_310.548_41;
    (secs * std::f64::consts::PI / 180.0 / 240.0).rem_euclid(std::f64::consts::TAU)
}

/// Rotates a TEME position/velocity (any length unit) into the Earth-fixed
/// frame. Polar motion is ignored.
pub fn teme_to_ecef(r: Vec3, v: Vec3, unix: f64) -> (Vec3, Vec3) {
    let (s, c) = gmst_rad(unix).sin_cos();
    let rot = |a: Vec3| Vec3::new(c * a.x + s * a.y, -s * a.x + c * a.y, a.z);
    let r_e = rot(r);
    let omega = Vec3::new(0.0, 0.0, EARTH_ROTATION_RAD_S);
    (r_e, rot(v) - omega.cross(r_e))
}

/// Inverse of the position part of [`teme_to_ecef`].
pub fn ecef_to_teme(r: Vec3, unix: f64) -> Vec3 {
    let (s, c) = gmst_rad(unix).sin_cos();
    Vec3::new(c * r.x - s * r.y, s * r.x + c * r.y, r.z)
}

/// Initialized SGP4 model for one element set.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub norad_id: u32,
    pub name: String,
    /// Element epoch, Unix seconds.
    pub epoch: f64,
    constants: Constants,
}

impl Propagator {
    /// Uses the WGS72 constants and the AFSPC sidereal-time convention of the
    /// reference implementation, so results line up with published test vectors.
    pub fn new(tle: &TleRecord) -> Result<Propagator, GeometryError> {
        let elements = Elements::from_tle(Some(tle.name.clone()), tle.line1.as_bytes(), tle.line2.as_bytes())
            .map_err(|e| GeometryError::Elements { norad_id: tle.norad_id, message: e.to_string() })?;
        let constants = Constants::from_elements_afspc_compatibility_mode(&elements)
            .map_err(|e| GeometryError::Elements { norad_id: tle.norad_id, message: e.to_string() })?;
        Ok(Propagator { norad_id: tle.norad_id, name: tle.name.clone(), epoch: tle.epoch, constants })
    }

    /// Raw TEME state (km, km/s) at `minutes` after epoch, without the span guard.
    pub fn teme_km(&self, minutes: f64) -> Result<(Vec3, Vec3), GeometryError> {
        let p = self.constants.propagate_afspc_compatibility_mode(MinutesSinceEpoch(minutes)).map_err(|e| {
            GeometryError::Propagation { norad_id: self.norad_id, name: self.name.clone(), message: e.to_string() }
        })?;
        let [x, y, z] = p.position;
        let [vx, vy, vz] = p.velocity;
        Ok((Vec3::new(x, y, z), Vec3::new(vx, vy, vz)))
    }

    /// Earth-fixed state at Unix time `t`.
    pub fn ecef(&self, t: f64) -> Result<EcefState, GeometryError> {
        let dt = t - self.epoch;
        if dt.abs() > MAX_PROPAGATION_SPAN_S {
            return Err(GeometryError::OutOfWindow {
                norad_id: self.norad_id,
                name: self.name.clone(),
                days: dt / 86_400.0,
            });
        }
        let (r, v) = self.teme_km(dt / 60.0)?;
        let (r, v) = teme_to_ecef(r * 1000.0, v * 1000.0, t);
        Ok(EcefState { position: r, velocity: v, timestamp: t })
    }
}

/// One-shot propagation of an element set to Unix time `t`.
pub fn propagate(tle: &TleRecord, t: f64) -> Result<EcefState, GeometryError> {
    Propagator::new(tle)?.ecef(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmst_reference_value() {
        // 1992-08-20 12:14 UT1: GMST = 152.578787886 deg
        let unix = (2_448_855.009_722 - 2_440_587.5) * 86_400.0;
        let deg = gmst_rad(unix).to_degrees();
        assert!((deg - 152.578_787_886).abs() < 1e-4, "{deg}");
    }

    #[test]
    fn teme_round_trip() {
        let r = Vec3::new(6_900e3, -120e3, 400e3);
        let (e, _) = teme_to_ecef(r, Vec3::default(), 1_748_736_012.0);
        let back = ecef_to_teme(e, 1_748_736_012.0);
        assert!((back - r).norm() < 1e-6);
    }
}
