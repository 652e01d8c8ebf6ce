//! Two-line element sets for circular orbits.

use std::f64::consts::PI;

use crate::geometry::{ecef_to_teme, Observer, Topocentric};
use crate::ingest::{days_from_civil, tle_checksum, TleRecord};

/// WGS72 gravitational parameter, km^3/s^2, as used by SGP4.
const MU_KM3_S2: f64 = 398_600.8;
/// WGS72 equatorial radius, km.
const EARTH_RADIUS_KM: f64 = 6378.135;

/// Mean elements of a circular orbit at a given epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularOrbit {
    pub norad_id: u32,
    pub name: String,
    pub epoch: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub mean_anomaly_deg: f64,
    pub mean_motion_rev_day: f64,
}

/// Keplerian mean motion of a circular orbit `altitude_km` above the equator.
pub fn mean_motion_rev_day(altitude_km: f64) -> f64 {
    let a = EARTH_RADIUS_KM + altitude_km;
    (MU_KM3_S2 / a.powi(3)).sqrt() * 86_400.0 / (2.0 * PI)
}

fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    (if m <= 2 { yoe + era * 400 + 1 } else { yoe + era * 400 }, m, d)
}

/// `YYDDD.DDDDDDDD` epoch field for a Unix time.
pub fn epoch_field(unix: f64) -> String {
    let days = (unix / 86_400.0).floor() as i64;
    let (year, _, _) = civil_from_days(days);
    let doy = (days - days_from_civil(year, 1, 1) + 1) as f64 + (unix - days as f64 * 86_400.0) / 86_400.0;
    format!("{:02}{:012.8}", year % 100, doy)
}

/// Angle reduced to [0, 360) after rounding to the four decimals a TLE holds.
fn angle_field(deg: f64) -> f64 {
    let r = (deg.rem_euclid(360.0) * 1e4).round() / 1e4;
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

fn with_checksum(body: String) -> String {
    let c = tle_checksum(&body);
    format!("{body}{c}")
}

impl CircularOrbit {
    pub fn line1(&self) -> String {
        with_checksum(format!(
            "1 {:05}U 25001A   {}  .00000000  00000-0  00000-0 0  999",
            self.norad_id,
            epoch_field(self.epoch)
        ))
    }

    pub fn line2(&self) -> String {
        with_checksum(format!(
            "2 {:05} {:8.4} {:8.4} {:07} {:8.4} {:8.4} {:11.8}{:5}",
            self.norad_id,
            self.inclination_deg,
            angle_field(self.raan_deg),
            100,
            0.0,
            angle_field(self.mean_anomaly_deg),
            self.mean_motion_rev_day,
            1
        ))
    }

    pub fn to_tle(&self) -> TleRecord {
        TleRecord::from_lines(&self.name, &self.line1(), &self.line2()).expect("generated element set is well formed")
    }
}

/// Elements of a circular orbit that puts a satellite in direction `dir` as
/// seen from `observer` at time `t_pass`. `None` when the direction's
/// sub-satellite latitude exceeds the inclination.
///
/// Placement is Keplerian; the SGP4 state differs by the secular and short
/// periodic terms, which is well under a degree over a few minutes.
#[allow(clippy::too_many_arguments)]
pub fn orbit_through(
    norad_id: u32,
    name: &str,
    epoch: f64,
    observer: &Observer,
    dir: &Topocentric,
    t_pass: f64,
    altitude_km: f64,
    inclination_deg: f64,
    ascending: bool,
) -> Option<CircularOrbit> {
    let a_m = (EARTH_RADIUS_KM + altitude_km) * 1000.0;
    let o = observer.ecef;
    let u = observer.ned_to_ecef(dir.to_ned());
    let b = o.dot(u);
    let disc = b * b - o.dot(o) + a_m * a_m;
    if disc < 0.0 {
        return None;
    }
    let rho = -b + disc.sqrt();
    let teme = ecef_to_teme(o + u * rho, t_pass).normalized();

    let inc = inclination_deg.to_radians();
    let s = teme.z / inc.sin();
    if s.abs() > 0.999 {
        return None;
    }
    let arg_lat = if ascending { s.asin() } else { PI - s.asin() };
    let alpha = teme.y.atan2(teme.x);
    let raan = alpha - (inc.cos() * arg_lat.sin()).atan2(arg_lat.cos());
    let n_rev_day = mean_motion_rev_day(altitude_km);
    let n_rad_s = n_rev_day * 2.0 * PI / 86_400.0;
    let m0 = arg_lat - n_rad_s * (t_pass - epoch);
    Some(CircularOrbit {
        norad_id,
        name: name.to_string(),
        epoch,
        inclination_deg,
        raan_deg: raan.to_degrees().rem_euclid(360.0),
        mean_anomaly_deg: m0.to_degrees().rem_euclid(360.0),
        mean_motion_rev_day: n_rev_day,
    })
}
