//! Dish attitude math.
//!
//! The dish reports its orientation as `ned2dishQuaternion`. We read it as the
//! rotation taking vectors from the dish body frame into the local North-East-Down
//! frame, and decompose it with the Z-Y-X (yaw, pitch, roll) Tait-Bryan sequence.
//!
//! The body frame is forward-right-down with the panel mounted face up: the
//! panel normal (boresight, panel +Z) is body `-z`, the panel top (panel +Y) is
//! body `-x` and panel +X is body `-y`. With the identity quaternion the panel
//! is level, its top points South and the boresight heading is North, so the
//! Y heading of the identity attitude is [`MOUNTING_OFFSET_DEG`].

use thiserror::Error;

use crate::ingest::UtStatusRecord;
use crate::vector::{wrap_deg_360, Vec3};

/// Panel +X axis expressed in the attitude body frame.
pub const PANEL_X: Vec3 = Vec3::new(0.0, -1.0, 0.0);
/// Panel +Y axis (towards the top edge of the panel) in the attitude body frame.
pub const PANEL_Y: Vec3 = Vec3::new(-1.0, 0.0, 0.0);
/// Panel +Z axis (boresight) in the attitude body frame.
pub const PANEL_Z: Vec3 = Vec3::new(0.0, 0.0, -1.0);

/// Y heading of the identity attitude.
pub const MOUNTING_OFFSET_DEG: f64 = 180.0;

/// Below this tilt the reported boresight azimuth is considered unreliable.
pub const LOW_TILT_THRESHOLD_DEG: f64 = 15.0;

const GIMBAL_PITCH_LIMIT_DEG: f64 = 89.9;
const VERTICAL_Y_LIMIT_DEG: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrientationError {
    #[error("quaternion has zero norm")]
    ZeroQuaternion,
    #[error("panel +Y axis is within {VERTICAL_Y_LIMIT_DEG} deg of vertical; heading undefined")]
    UndefinedHeading,
    #[error("boresight tilt {0:.3} deg is outside [0, 90)")]
    TiltOutOfRange(f64),
    #[error("status record carries neither a quaternion nor tilt and azimuth")]
    NoHeadingSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Result<Quaternion, OrientationError> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(OrientationError::ZeroQuaternion);
        }
        Ok(Quaternion::new(self.w / n, self.x / n, self.y / n, self.z / n))
    }

    pub fn conjugate(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn dot(&self, o: &Quaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// Rotation of `angle_rad` about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Quaternion {
        let a = axis.normalized();
        let (s, c) = (angle_rad / 2.0).sin_cos();
        Quaternion::new(c, a.x * s, a.y * s, a.z * s)
    }

    /// Body-to-NED rotation for Z-Y-X Tait-Bryan angles in degrees.
    pub fn from_tait_bryan(yaw_deg: f64, pitch_deg: f64, roll_deg: f64) -> Quaternion {
        let (sy, cy) = (yaw_deg.to_radians() / 2.0).sin_cos();
        let (sp, cp) = (pitch_deg.to_radians() / 2.0).sin_cos();
        let (sr, cr) = (roll_deg.to_radians() / 2.0).sin_cos();
        Quaternion::new(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
    }

    /// Rotates `v` by this quaternion (`q v q*`). Assumes unit norm.
    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Spherical linear interpolation along the shorter arc.
    pub fn slerp(&self, other: &Quaternion, t: f64) -> Quaternion {
        let mut b = *other;
        let mut cos = self.dot(other);
        if cos < 0.0 {
            b = Quaternion::new(-b.w, -b.x, -b.y, -b.z);
            cos = -cos;
        }
        let (wa, wb) = if cos > 0.9995 {
            (1.0 - t, t)
        } else {
            let theta = cos.min(1.0).acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        let q = Quaternion::new(
            wa * self.w + wb * b.w,
            wa * self.x + wb * b.x,
            wa * self.y + wb * b.y,
            wa * self.z + wb * b.z,
        );
        q.normalized().unwrap_or(*self)
    }
}

impl std::ops::Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaitBryan {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    /// |pitch| exceeds 89.9 deg; yaw and roll are not separable there.
    pub near_gimbal_lock: bool,
}

/// Z-Y-X Tait-Bryan decomposition of a body-to-NED quaternion.
pub fn to_tait_bryan(q: &Quaternion) -> Result<TaitBryan, OrientationError> {
    let q = q.normalized()?;
    let Quaternion { w, x, y, z } = q;
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    let pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0).asin();
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let pitch_deg = pitch.to_degrees();
    Ok(TaitBryan {
        yaw_deg: yaw.to_degrees(),
        pitch_deg,
        roll_deg: roll.to_degrees(),
        near_gimbal_lock: pitch_deg.abs() > GIMBAL_PITCH_LIMIT_DEG,
    })
}

fn panel_y_ned(q: &Quaternion) -> Result<Vec3, OrientationError> {
    Ok(q.normalized()?.rotate(PANEL_Y))
}

fn heading_of(v: Vec3) -> Result<f64, OrientationError> {
    let horizontal = (v.x * v.x + v.y * v.y).sqrt();
    if horizontal < VERTICAL_Y_LIMIT_DEG.to_radians().sin() * v.norm() {
        return Err(OrientationError::UndefinedHeading);
    }
    Ok(wrap_deg_360(v.y.atan2(v.x).to_degrees()))
}

/// Bearing of the ground projection of the panel +Y axis, clockwise from North.
pub fn y_heading(q: &Quaternion) -> Result<f64, OrientationError> {
    heading_of(panel_y_ned(q)?)
}

/// Heading of the panel's forward direction derived from the +Y axis.
///
/// When the panel top is raised (the normal vehicle mount, +Y pointing up and
/// back) the forward direction is opposite the Y heading. A level +Y counts as
/// raised.
pub fn compensated_heading(q: &Quaternion) -> Result<f64, OrientationError> {
    let y_axis = panel_y_ned(q)?;
    let delta = heading_of(y_axis)?;
    // NED z is down, so a non-positive z component means the top edge is not below level.
    if y_axis.z <= 0.0 {
        Ok(wrap_deg_360(delta + 180.0))
    } else {
        Ok(delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadingSource {
    Quaternion,
    BoresightAzimuth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingEstimate {
    pub heading_deg: f64,
    pub source: HeadingSource,
    /// Boresight azimuth used at a tilt below [`LOW_TILT_THRESHOLD_DEG`].
    pub low_confidence: bool,
}

/// Heading used for frame compensation: the compensated heading when a usable
/// quaternion exists, otherwise the reported boresight azimuth.
pub fn effective_heading(status: &UtStatusRecord) -> Result<HeadingEstimate, OrientationError> {
    if let Some(q) = status.valid_quaternion() {
        if let Ok(h) = compensated_heading(&q) {
            return Ok(HeadingEstimate { heading_deg: h, source: HeadingSource::Quaternion, low_confidence: false });
        }
    }
    match (status.tilt_deg, status.boresight_azimuth_deg) {
        (Some(tilt), Some(az)) => Ok(HeadingEstimate {
            heading_deg: wrap_deg_360(az),
            source: HeadingSource::BoresightAzimuth,
            low_confidence: tilt < LOW_TILT_THRESHOLD_DEG,
        }),
        _ => Err(OrientationError::NoHeadingSource),
    }
}

/// Full orientation state of the dish at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attitude {
    /// Body-to-NED rotation, unit norm.
    pub quaternion: Quaternion,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub tilt_deg: f64,
    /// Azimuth of the boresight ground projection (unstable near level).
    pub boresight_azimuth_deg: f64,
    pub y_heading_deg: f64,
    pub compensated_heading_deg: f64,
    pub heading: HeadingEstimate,
}

impl Attitude {
    pub fn from_quaternion(q: &Quaternion) -> Result<Attitude, OrientationError> {
        let q = q.normalized()?;
        let tb = to_tait_bryan(&q)?;
        let boresight = q.rotate(PANEL_Z);
        let tilt_deg = (-boresight.z).clamp(-1.0, 1.0).acos().to_degrees();
        if !(0.0..90.0).contains(&tilt_deg) {
            return Err(OrientationError::TiltOutOfRange(tilt_deg));
        }
        let y_heading_deg = y_heading(&q)?;
        let compensated_heading_deg = compensated_heading(&q)?;
        Ok(Attitude {
            quaternion: q,
            yaw_deg: tb.yaw_deg,
            pitch_deg: tb.pitch_deg,
            roll_deg: tb.roll_deg,
            tilt_deg,
            boresight_azimuth_deg: wrap_deg_360(boresight.y.atan2(boresight.x).to_degrees()),
            y_heading_deg,
            compensated_heading_deg,
            heading: HeadingEstimate {
                heading_deg: compensated_heading_deg,
                source: HeadingSource::Quaternion,
                low_confidence: false,
            },
        })
    }

    /// Attitude of a panel tilted by `tilt_deg` towards `heading_deg` with no roll,
    /// used when only the reported tilt and boresight azimuth are available.
    pub fn from_tilt_heading(tilt_deg: f64, heading_deg: f64) -> Result<Attitude, OrientationError> {
        if !(0.0..90.0).contains(&tilt_deg) {
            return Err(OrientationError::TiltOutOfRange(tilt_deg));
        }
        let q = Quaternion::from_tait_bryan(heading_deg, -tilt_deg, 0.0);
        let mut att = Attitude::from_quaternion(&q)?;
        att.heading = HeadingEstimate {
            heading_deg: wrap_deg_360(heading_deg),
            source: HeadingSource::BoresightAzimuth,
            low_confidence: tilt_deg < LOW_TILT_THRESHOLD_DEG,
        };
        Ok(att)
    }

    pub fn from_status(status: &UtStatusRecord) -> Result<Attitude, OrientationError> {
        if let Some(q) = status.valid_quaternion() {
            if let Ok(att) = Attitude::from_quaternion(&q) {
                return Ok(att);
            }
        }
        match (status.tilt_deg, status.boresight_azimuth_deg) {
            (Some(tilt), Some(az)) => Attitude::from_tilt_heading(tilt, az),
            _ => Err(OrientationError::NoHeadingSource),
        }
    }

    pub fn identity() -> Attitude {
        Attitude::from_quaternion(&Quaternion::IDENTITY).expect("identity attitude is valid")
    }

    /// Boresight unit vector in NED built from the tilt and the effective heading.
    pub fn boresight_ned(&self) -> Vec3 {
        let (st, ct) = self.tilt_deg.to_radians().sin_cos();
        let (sh, ch) = self.heading.heading_deg.to_radians().sin_cos();
        Vec3::new(ch * st, sh * st, -ct)
    }

    /// Maps a vector given in panel coordinates (X, Y, Z = boresight) into NED.
    pub fn panel_to_ned(&self, v: Vec3) -> Vec3 {
        let body = PANEL_X * v.x + PANEL_Y * v.y + PANEL_Z * v.z;
        self.quaternion.rotate(body)
    }

    /// Inverse of [`Attitude::panel_to_ned`].
    pub fn ned_to_panel(&self, v: Vec3) -> Vec3 {
        let body = self.quaternion.conjugate().rotate(v);
        Vec3::new(body.dot(PANEL_X), body.dot(PANEL_Y), body.dot(PANEL_Z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::bearing_diff_deg;

    /// Rotation matrix from the axis-angle (Rodrigues) formula, independent of
    /// the quaternion code.
    fn rodrigues(axis: Vec3, angle_deg: f64) -> [[f64; 3]; 3] {
        let a = axis.normalized();
        let (s, c) = angle_deg.to_radians().sin_cos();
        let t = 1.0 - c;
        [
            [t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
            [t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x],
            [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
        ]
    }

    fn matmul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        m
    }

    fn quat_from_matrix(m: [[f64; 3]; 3]) -> Quaternion {
        // Shepperd's method, trace branch is enough for the rotations used here.
        let tr = m[0][0] + m[1][1] + m[2][2];
        if tr > -0.5 {
            let s = (tr + 1.0).sqrt() * 2.0;
            Quaternion::new(s / 4.0, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s)
        } else {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Quaternion::new((m[2][1] - m[1][2]) / s, s / 4.0, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s)
        }
    }

    const DOWN: Vec3 = Vec3::new(0.0, 0.0, 1.0);
    const BODY_X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    const BODY_Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);

    #[test]
    fn identity_has_zero_angles() {
        let tb = to_tait_bryan(&Quaternion::IDENTITY).unwrap();
        assert_eq!((tb.yaw_deg, tb.pitch_deg, tb.roll_deg), (0.0, 0.0, 0.0));
        assert!(!tb.near_gimbal_lock);
    }

    #[test]
    fn yaw_about_down_axis() {
        let q = quat_from_matrix(rodrigues(DOWN, 90.0));
        let tb = to_tait_bryan(&q).unwrap();
        assert!((tb.yaw_deg - 90.0).abs() < 1e-9);
        assert!(tb.pitch_deg.abs() < 1e-9 && tb.roll_deg.abs() < 1e-9);
    }

    #[test]
    fn roll_about_body_x() {
        let q = quat_from_matrix(rodrigues(BODY_X, 30.0));
        let tb = to_tait_bryan(&q).unwrap();
        assert!((tb.roll_deg - 30.0).abs() < 1e-9);
        assert!(tb.yaw_deg.abs() < 1e-9 && tb.pitch_deg.abs() < 1e-9);
    }

    #[test]
    fn zero_quaternion_is_rejected() {
        let q = Quaternion::new(0.0, 0.0, 0.0, 0.0);
        assert_eq!(to_tait_bryan(&q), Err(OrientationError::ZeroQuaternion));
    }

    #[test]
    fn gimbal_adjacent_pitch_is_flagged() {
        let q = quat_from_matrix(rodrigues(BODY_Y, 89.95));
        assert!(to_tait_bryan(&q).unwrap().near_gimbal_lock);
    }

    #[test]
    fn identity_y_heading_is_mounting_offset() {
        assert!((y_heading(&Quaternion::IDENTITY).unwrap() - MOUNTING_OFFSET_DEG).abs() < 1e-12);
        // level panel counts as raised, so the forward heading is North
        assert!(compensated_heading(&Quaternion::IDENTITY).unwrap().abs() < 1e-12);
    }

    #[test]
    fn y_heading_follows_yaw() {
        // R = Rz(60) * Ry(10), built by the axis-angle oracle
        let m = matmul(rodrigues(DOWN, 60.0), rodrigues(BODY_Y, 10.0));
        let q = quat_from_matrix(m);
        let delta = y_heading(&q).unwrap();
        assert!(bearing_diff_deg(delta, 60.0 + MOUNTING_OFFSET_DEG) < 1e-6, "{delta}");
        // nose-up pitch lowers the panel top: no compensation
        assert!(bearing_diff_deg(compensated_heading(&q).unwrap(), delta) < 1e-9);
    }

    #[test]
    fn y_axis_vertical_is_an_error() {
        // pitch the body -x (panel top) straight up
        let q = quat_from_matrix(rodrigues(BODY_Y, -90.0));
        assert_eq!(y_heading(&q), Err(OrientationError::UndefinedHeading));
        assert_eq!(compensated_heading(&q), Err(OrientationError::UndefinedHeading));
    }

    #[test]
    fn compensation_branches() {
        // panel top raised, Y heading 240 -> forward heading 60
        let q = Quaternion::from_tait_bryan(60.0, -20.0, 0.0);
        assert!(bearing_diff_deg(y_heading(&q).unwrap(), 240.0) < 1e-9);
        assert!(bearing_diff_deg(compensated_heading(&q).unwrap(), 60.0) < 1e-9);
        // panel top lowered, Y heading 10 stays 10
        let q = Quaternion::from_tait_bryan(10.0 - MOUNTING_OFFSET_DEG, 20.0, 0.0);
        assert!(bearing_diff_deg(y_heading(&q).unwrap(), 10.0) < 1e-9);
        assert!(bearing_diff_deg(compensated_heading(&q).unwrap(), 10.0) < 1e-9);
    }

    #[test]
    fn compensated_heading_stable_over_tilt_sweep() {
        let heading = 60.0;
        let mut tilt = 2.0;
        while tilt <= 40.0 {
            // tilt about the panel X axis (body -y), then yaw about down
            let m = matmul(rodrigues(DOWN, heading), rodrigues(-BODY_Y, tilt));
            let q = quat_from_matrix(m);
            let h = compensated_heading(&q).unwrap();
            assert!(bearing_diff_deg(h, heading) <= 0.5, "tilt {tilt}: {h}");
            tilt += 0.5;
        }
    }

    #[test]
    fn attitude_from_tilt_heading_matches_boresight() {
        let att = Attitude::from_tilt_heading(26.5, 3.2).unwrap();
        assert!((att.tilt_deg - 26.5).abs() < 1e-9);
        assert!(bearing_diff_deg(att.boresight_azimuth_deg, 3.2) < 1e-9);
        assert!(bearing_diff_deg(att.compensated_heading_deg, 3.2) < 1e-9);
        let b = att.boresight_ned();
        let from_q = att.panel_to_ned(Vec3::new(0.0, 0.0, 1.0));
        assert!(b.angle_to(from_q) < 1e-9);
        assert_eq!(att.heading.source, HeadingSource::BoresightAzimuth);
    }

    #[test]
    fn panel_round_trip() {
        let att = Attitude::from_quaternion(&Quaternion::from_tait_bryan(33.0, -12.0, 4.0)).unwrap();
        let v = Vec3::new(0.3, -0.4, 0.866).normalized();
        let back = att.ned_to_panel(att.panel_to_ned(v));
        assert!((back - v).norm() < 1e-12);
    }

    #[test]
    fn slerp_midpoint_of_yaw() {
        let a = Quaternion::from_tait_bryan(10.0, -5.0, 0.0);
        let b = Quaternion::from_tait_bryan(30.0, -5.0, 0.0);
        let m = a.slerp(&b, 0.5);
        let tb = to_tait_bryan(&m).unwrap();
        assert!((tb.yaw_deg - 20.0).abs() < 1e-9);
        assert!((tb.pitch_deg + 5.0).abs() < 1e-9);
    }
}
