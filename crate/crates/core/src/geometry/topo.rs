//! Geodetic positions and local North-East-Down look angles.

use super::propagate::EcefState;
use crate::ingest::UtLocationRecord;
use crate::vector::{wrap_deg_360, Vec3};

const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// Look direction: azimuth clockwise from True North, elevation above the
/// local horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Topocentric {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Topocentric {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Topocentric { azimuth_deg: wrap_deg_360(azimuth_deg), elevation_deg }
    }

    /// Direction of a NED vector (need not be unit length).
    pub fn from_ned(v: Vec3) -> Self {
        let horizontal = (v.x * v.x + v.y * v.y).sqrt();
        let elevation_deg = (-v.z).atan2(horizontal).to_degrees();
        let azimuth_deg = if horizontal == 0.0 { 0.0 } else { wrap_deg_360(v.y.atan2(v.x).to_degrees()) };
        Topocentric { azimuth_deg, elevation_deg }
    }

    /// Unit NED vector.
    pub fn to_ned(&self) -> Vec3 {
        let (se, ce) = self.elevation_deg.to_radians().sin_cos();
        let (sa, ca) = self.azimuth_deg.to_radians().sin_cos();
        Vec3::new(ce * ca, ce * sa, -se)
    }

    /// Great-circle angle to another direction, degrees.
    pub fn separation_deg(&self, other: &Topocentric) -> f64 {
        self.to_ned().angle_to(other.to_ned()).to_degrees()
    }
}

/// WGS84 geodetic to Earth-fixed Cartesian, metres.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Vec3 {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let (sl, cl) = lat_deg.to_radians().sin_cos();
    let (so, co) = lon_deg.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - e2 * sl * sl).sqrt();
    Vec3::new((n + alt_m) * cl * co, (n + alt_m) * cl * so, (n * (1.0 - e2) + alt_m) * sl)
}

/// Ground observer with its local frame precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observer {
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
    pub ecef: Vec3,
    north: Vec3,
    east: Vec3,
    down: Vec3,
}

impl Observer {
    pub fn new(latitude: f64, longitude: f64, altitude_m: f64) -> Self {
        let (sl, cl) = latitude.to_radians().sin_cos();
        let (so, co) = longitude.to_radians().sin_cos();
        Observer {
            latitude,
            longitude,
            altitude_m,
            ecef: geodetic_to_ecef(latitude, longitude, altitude_m),
            north: Vec3::new(-sl * co, -sl * so, cl),
            east: Vec3::new(-so, co, 0.0),
            down: Vec3::new(-cl * co, -cl * so, -sl),
        }
    }

    pub fn from_record(r: &UtLocationRecord) -> Self {
        Observer::new(r.latitude, r.longitude, r.altitude_m)
    }

    /// Earth-fixed vector expressed in the local NED frame.
    pub fn ecef_to_ned(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.north), v.dot(self.east), v.dot(self.down))
    }

    /// Local NED vector expressed in the Earth-fixed frame.
    pub fn ned_to_ecef(&self, v: Vec3) -> Vec3 {
        self.north * v.x + self.east * v.y + self.down * v.z
    }

    /// Direction from the observer to an Earth-fixed point.
    pub fn look_at(&self, target: Vec3) -> Topocentric {
        Topocentric::from_ned(self.ecef_to_ned(target - self.ecef))
    }
}

/// Look angles from a logged position to a satellite state.
pub fn topocentric(observer: &UtLocationRecord, sat: &EcefState) -> Topocentric {
    Observer::from_record(observer).look_at(sat.position)
}
