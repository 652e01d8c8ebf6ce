//! Orbits, look angles, the field-of-view cone and the obstruction-map projection.

mod fov;
mod projection;
mod propagate;
mod topo;

use thiserror::Error;

use crate::ingest::FrameType;

pub use fov::{in_fov, visible_catalog, Catalog, FovModel, Visible, DEFAULT_ELEVATION_MASK_DEG};
pub use projection::{direction_to_pixel, pixel_to_direction, MapGeometry, Pixel};
pub use propagate::{
    ecef_to_teme, gmst_rad, julian_date, propagate, teme_to_ecef, EcefState, Propagator, EARTH_ROTATION_RAD_S,
    MAX_PROPAGATION_SPAN_S,
};
pub use topo::{geodetic_to_ecef, topocentric, Observer, Topocentric};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("element set {norad_id}: {message}")]
    Elements { norad_id: u32, message: String },
    #[error("{name} ({norad_id}): propagation failed: {message}")]
    Propagation { norad_id: u32, name: String, message: String },
    #[error("{name} ({norad_id}): requested time is {days:.2} days from epoch")]
    OutOfWindow { norad_id: u32, name: String, days: f64 },
    #[error("pixel ({row},{col}) lies outside the map disc")]
    PixelOutsideDisc { row: usize, col: usize },
    #[error("direction az {azimuth_deg:.3} el {elevation_deg:.3} lies outside the {frame_type:?} disc")]
    DirectionOutsideDisc { azimuth_deg: f64, elevation_deg: f64, frame_type: FrameType },
}
