//! Field-of-view cone and the set of candidate satellites inside it.

use super::projection::MapGeometry;
use super::propagate::Propagator;
use super::topo::{Observer, Topocentric};
use crate::ingest::TleRecord;
use crate::orientation::Attitude;

/// Candidates below this elevation are ignored by default.
pub const DEFAULT_ELEVATION_MASK_DEG: f64 = 20.0;

/// Full cone angles of known dish models.
const KNOWN_MODELS: [(&str, f64); 2] = [("rev3_proto2", 110.0), ("hp1_proto2", 140.0)];

#[derive(Debug, Clone, PartialEq)]
pub struct FovModel {
    pub hardware_model: String,
    pub full_angle_deg: f64,
}

impl FovModel {
    pub fn new(hardware_model: &str, full_angle_deg: f64) -> Option<FovModel> {
        (full_angle_deg > 0.0 && full_angle_deg < 180.0)
            .then(|| FovModel { hardware_model: hardware_model.to_string(), full_angle_deg })
    }

    /// Built-in cone for a hardware model string.
    pub fn for_hardware(model: &str) -> Option<FovModel> {
        KNOWN_MODELS.iter().find(|(m, _)| m.eq_ignore_ascii_case(model)).and_then(|&(m, a)| FovModel::new(m, a))
    }

    pub fn half_angle_deg(&self) -> f64 {
        self.full_angle_deg / 2.0
    }

    /// Map geometry whose disc edge is the cone edge.
    pub fn map_geometry(&self) -> MapGeometry {
        MapGeometry::new(self.half_angle_deg())
    }
}

/// True when `dir` lies within the cone around the boresight.
pub fn in_fov(dir: &Topocentric, attitude: &Attitude, fov: &FovModel) -> bool {
    let sep = dir.to_ned().angle_to(attitude.boresight_ned()).to_degrees();
    sep <= fov.half_angle_deg()
}

/// Element sets with their initialized propagators.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub entries: Vec<(TleRecord, Propagator)>,
}

impl Catalog {
    /// Sets whose elements cannot be initialized are dropped with a warning.
    pub fn new(records: &[TleRecord]) -> Catalog {
        let entries = records
            .iter()
            .filter_map(|r| match Propagator::new(r) {
                Ok(p) => Some((r.clone(), p)),
                Err(e) => {
                    log::warn!("dropping {} from catalog: {e}", r.name);
                    None
                }
            })
            .collect();
        Catalog { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn by_norad(&self, norad_id: u32) -> Option<&(TleRecord, Propagator)> {
        self.entries.iter().find(|(r, _)| r.norad_id == norad_id)
    }

    /// Direction to satellite `idx` at time `t`, or `None` when propagation fails.
    pub fn look(&self, idx: usize, t: f64, observer: &Observer) -> Option<Topocentric> {
        let (_, prop) = &self.entries[idx];
        match prop.ecef(t) {
            Ok(state) => Some(observer.look_at(state.position)),
            Err(e) => {
                log::debug!("{e}");
                None
            }
        }
    }
}

/// One candidate returned by [`visible_catalog`].
#[derive(Debug, Clone, PartialEq)]
pub struct Visible {
    /// Index into the catalog entries.
    pub index: usize,
    pub norad_id: u32,
    pub direction: Topocentric,
}

/// Non-DTC satellites inside the cone and above the elevation mask at `t`,
/// highest first (ties by catalog number).
pub fn visible_catalog(
    t: f64,
    observer: &Observer,
    attitude: &Attitude,
    fov: &FovModel,
    catalog: &Catalog,
    elevation_mask_deg: f64,
) -> Vec<Visible> {
    let mut out: Vec<Visible> = catalog
        .entries
        .iter()
        .enumerate()
        .filter(|(_, (tle, _))| !tle.is_dtc)
        .filter_map(|(i, (tle, _))| {
            let dir = catalog.look(i, t, observer)?;
            (dir.elevation_deg >= elevation_mask_deg && in_fov(&dir, attitude, fov)).then_some(Visible {
                index: i,
                norad_id: tle.norad_id,
                direction: dir,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.direction.elevation_deg.total_cmp(&a.direction.elevation_deg).then(a.norad_id.cmp(&b.norad_id))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_models() {
        assert_eq!(FovModel::for_hardware("rev3_proto2").unwrap().full_angle_deg, 110.0);
        assert_eq!(FovModel::for_hardware("hp1_proto2").unwrap().full_angle_deg, 140.0);
        assert!(FovModel::for_hardware("mini1").is_none());
        assert!(FovModel::new("x", 180.0).is_none());
    }

    #[test]
    fn boresight_and_boundary() {
        let fov = FovModel::for_hardware("rev3_proto2").unwrap();
        let att = Attitude::from_tilt_heading(26.5, 3.2).unwrap();
        let bore = Topocentric::new(3.2, 90.0 - 26.5);
        assert!(in_fov(&bore, &att, &fov));
        // straight along the tilt plane, just past the half angle
        let outside = Topocentric::new(3.2, 90.0 - 26.5 - 55.01);
        assert!(!in_fov(&outside, &att, &fov));
        let inside = Topocentric::new(3.2, 90.0 - 26.5 - 54.99);
        assert!(in_fov(&inside, &att, &fov));
    }
}
