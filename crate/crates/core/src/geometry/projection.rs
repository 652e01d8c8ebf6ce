//! Pixel to sky-direction mapping for both obstruction-map frames.
//!
//! Both frames use an azimuthal-equidistant projection: distance from the
//! centre pixel is proportional to the angle from the frame axis, reaching
//! `zenith_max_deg` at `max_radius_px`. The earth frame is centred on the
//! local zenith with North at the top and East to the right. The dish frame is
//! centred on the boresight with the panel's forward direction at the bottom;
//! with a level panel facing North it is the earth frame turned by 180 deg.

use super::topo::Topocentric;
use super::GeometryError;
use crate::ingest::{FrameType, GRID_SIZE};
use crate::orientation::Attitude;
use crate::vector::Vec3;

/// Slack for treating a direction on the disc edge as inside.
const EDGE_EPS_DEG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub row: usize,
    pub col: usize,
}

impl Pixel {
    pub const fn new(row: usize, col: usize) -> Self {
        Pixel { row, col }
    }

    pub fn index(&self) -> usize {
        self.row * GRID_SIZE + self.col
    }

    pub fn from_index(i: usize) -> Self {
        Pixel { row: i / GRID_SIZE, col: i % GRID_SIZE }
    }

    pub fn distance(&self, other: &Pixel) -> f64 {
        let dr = self.row as f64 - other.row as f64;
        let dc = self.col as f64 - other.col as f64;
        (dr * dr + dc * dc).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapGeometry {
    pub grid_size: usize,
    pub center: usize,
    pub max_radius_px: f64,
    pub zenith_max_deg: f64,
}

impl MapGeometry {
    pub fn new(zenith_max_deg: f64) -> Self {
        MapGeometry {
            grid_size: GRID_SIZE,
            center: GRID_SIZE / 2,
            max_radius_px: (GRID_SIZE / 2) as f64,
            zenith_max_deg,
        }
    }

    /// Angular size of one pixel step along a radius, degrees.
    pub fn deg_per_px(&self) -> f64 {
        self.zenith_max_deg / self.max_radius_px
    }

    fn offset(&self, px: &Pixel) -> (f64, f64) {
        (px.col as f64 - self.center as f64, px.row as f64 - self.center as f64)
    }

    pub fn radius_px(&self, px: &Pixel) -> f64 {
        let (dx, dy) = self.offset(px);
        (dx * dx + dy * dy).sqrt()
    }

    pub fn in_disc(&self, px: &Pixel) -> bool {
        px.row < self.grid_size && px.col < self.grid_size && self.radius_px(px) <= self.max_radius_px
    }

    /// All in-disc pixels in row-major order.
    pub fn disc_pixels(&self) -> Vec<Pixel> {
        (0..self.grid_size * self.grid_size).map(Pixel::from_index).filter(|p| self.in_disc(p)).collect()
    }

    /// Radius in pixels for an angle from the frame axis.
    pub fn radius_of(&self, zenith_deg: f64) -> f64 {
        zenith_deg / self.zenith_max_deg * self.max_radius_px
    }

    /// Rounds continuous image coordinates to a pixel, half away from zero
    /// relative to the centre. If that lands outside the disc the nearest
    /// in-disc pixel among the four neighbours is used.
    fn snap(&self, dx: f64, dy: f64) -> Option<Pixel> {
        let c = self.center as f64;
        let to_px = |ox: f64, oy: f64| -> Option<Pixel> {
            let (col, row) = (c + ox, c + oy);
            if col < 0.0 || row < 0.0 {
                return None;
            }
            let p = Pixel::new(row as usize, col as usize);
            self.in_disc(&p).then_some(p)
        };
        if let Some(p) = to_px(dx.round(), dy.round()) {
            return Some(p);
        }
        let mut best: Option<(f64, Pixel)> = None;
        for ox in [dx.floor(), dx.ceil()] {
            for oy in [dy.floor(), dy.ceil()] {
                if let Some(p) = to_px(ox, oy) {
                    let d = (ox - dx).hypot(oy - dy);
                    if best.is_none_or(|(bd, bp)| d < bd || (d == bd && p < bp)) {
                        best = Some((d, p));
                    }
                }
            }
        }
        best.map(|(_, p)| p)
    }
}

/// Unit vector in panel coordinates for a dish-frame zenith angle and image
/// bearing (measured from the bottom of the image, towards the right).
fn panel_vector(zenith_deg: f64, bearing_deg: f64) -> Vec3 {
    let (sz, cz) = zenith_deg.to_radians().sin_cos();
    let (sb, cb) = bearing_deg.to_radians().sin_cos();
    // forward is panel -Y, right of forward is panel -X
    Vec3::new(-sz * sb, -sz * cb, cz)
}

pub fn pixel_to_direction(
    px: &Pixel,
    frame_type: FrameType,
    attitude: &Attitude,
    geom: &MapGeometry,
) -> Result<Topocentric, GeometryError> {
    if !geom.in_disc(px) {
        return Err(GeometryError::PixelOutsideDisc { row: px.row, col: px.col });
    }
    let (dx, dy) = geom.offset(px);
    let zenith = geom.zenith_max_deg * (dx * dx + dy * dy).sqrt() / geom.max_radius_px;
    match frame_type {
        FrameType::Earth => {
            let az = dx.atan2(-dy).to_degrees();
            Ok(Topocentric::new(az, 90.0 - zenith))
        }
        FrameType::Ut => {
            let bearing = (-dx).atan2(dy).to_degrees();
            let ned = attitude.panel_to_ned(panel_vector(zenith, bearing));
            Ok(Topocentric::from_ned(ned))
        }
    }
}

pub fn direction_to_pixel(
    dir: &Topocentric,
    frame_type: FrameType,
    attitude: &Attitude,
    geom: &MapGeometry,
) -> Result<Pixel, GeometryError> {
    let (zenith, dx_unit, dy_unit) = match frame_type {
        FrameType::Earth => {
            let (sa, ca) = dir.azimuth_deg.to_radians().sin_cos();
            (90.0 - dir.elevation_deg, sa, -ca)
        }
        FrameType::Ut => {
            let p = attitude.ned_to_panel(dir.to_ned());
            let zenith = p.z.clamp(-1.0, 1.0).acos().to_degrees();
            let bearing = (-p.x).atan2(-p.y);
            let (sb, cb) = bearing.sin_cos();
            (zenith, -sb, cb)
        }
    };
    if zenith > geom.zenith_max_deg + EDGE_EPS_DEG {
        return Err(GeometryError::DirectionOutsideDisc {
            azimuth_deg: dir.azimuth_deg,
            elevation_deg: dir.elevation_deg,
            frame_type,
        });
    }
    let r = geom.radius_of(zenith.min(geom.zenith_max_deg));
    geom.snap(r * dx_unit, r * dy_unit).ok_or(GeometryError::DirectionOutsideDisc {
        azimuth_deg: dir.azimuth_deg,
        elevation_deg: dir.elevation_deg,
        frame_type,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orientation::Quaternion;
    use crate::vector::bearing_diff_deg;

    fn geom() -> MapGeometry {
        MapGeometry::new(55.0)
    }

    #[test]
    fn disc_has_expected_size() {
        let n = geom().disc_pixels().len();
        assert!(n > 11_000 && n < 12_000, "{n}");
    }

    #[test]
    fn earth_centre_and_top() {
        let g = geom();
        let id = Attitude::identity();
        let c = pixel_to_direction(&Pixel::new(61, 61), FrameType::Earth, &id, &g).unwrap();
        assert_eq!(c.elevation_deg, 90.0);
        let top = pixel_to_direction(&Pixel::new(0, 61), FrameType::Earth, &id, &g).unwrap();
        assert!(bearing_diff_deg(top.azimuth_deg, 0.0) < 1e-12);
        assert!((top.elevation_deg - 35.0).abs() < 1e-12);
        let zen = direction_to_pixel(&Topocentric::new(0.0, 90.0), FrameType::Earth, &id, &g).unwrap();
        assert_eq!(zen, Pixel::new(61, 61));
    }

    #[test]
    fn earth_east_is_right() {
        let g = geom();
        let id = Attitude::identity();
        let p = pixel_to_direction(&Pixel::new(61, 122), FrameType::Earth, &id, &g).unwrap();
        assert!(bearing_diff_deg(p.azimuth_deg, 90.0) < 1e-12);
    }

    #[test]
    fn ut_bottom_is_forward_edge() {
        let g = geom();
        let att = Attitude::from_quaternion(&Quaternion::from_tait_bryan(0.0, -20.0, 0.0)).unwrap();
        let d = pixel_to_direction(&Pixel::new(122, 61), FrameType::Ut, &att, &g).unwrap();
        // boresight tilted 20 deg towards North, bottom edge another 55 deg beyond
        assert!(bearing_diff_deg(d.azimuth_deg, 0.0) < 1e-9);
        assert!((d.elevation_deg - (90.0 - 20.0 - 55.0)).abs() < 1e-9);
    }

    #[test]
    fn below_fov_edge_rejected() {
        let g = geom();
        let id = Attitude::identity();
        assert!(direction_to_pixel(&Topocentric::new(10.0, 30.0), FrameType::Earth, &id, &g).is_err());
    }

    #[test]
    fn round_trip_identity_both_frames() {
        let g = geom();
        let att = Attitude::from_quaternion(&Quaternion::from_tait_bryan(37.0, -8.0, 0.0)).unwrap();
        for px in g.disc_pixels() {
            for ft in [FrameType::Earth, FrameType::Ut] {
                let d = pixel_to_direction(&px, ft, &att, &g).unwrap();
                assert_eq!(direction_to_pixel(&d, ft, &att, &g).unwrap(), px, "{ft:?}");
            }
        }
    }
}
