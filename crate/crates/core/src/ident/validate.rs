//! Checking identifications by re-drawing the predicted trajectory.

use super::interp::LocationTrack;
use super::{IdentConfig, IdentifyOutput};
use crate::geometry::{direction_to_pixel, Catalog, MapGeometry, Pixel};
use crate::ingest::FrameType;
use crate::mapproc::Mask;
use crate::orientation::Attitude;

/// Intervals whose predicted trace strays further than this are flagged.
pub const DEFAULT_PIXEL_DIFF_FLAG_PX: f64 = 2.0;

/// Earth-frame pixels a catalog satellite would have lit between `t_from`
/// and `t_to`, sampled every `step_s`.
pub fn reconstruct_map(
    catalog: &Catalog,
    catalog_index: usize,
    locations: &LocationTrack,
    geom: &MapGeometry,
    t_from: f64,
    t_to: f64,
    step_s: f64,
) -> Mask {
    let mut mask = Mask::empty();
    let identity = Attitude::identity();
    let n = ((t_to - t_from) / step_s).floor().max(0.0) as usize;
    for k in 0..=n {
        let t = t_from + k as f64 * step_s;
        let Some(obs) = locations.at(t) else { continue };
        let Some(dir) = catalog.look(catalog_index, t, &obs) else { continue };
        if let Ok(px) = direction_to_pixel(&dir, FrameType::Earth, &identity, geom) {
            mask.set(&px, true);
        }
    }
    mask
}

/// Mean distance from each predicted pixel to the nearest observed pixel.
pub fn interval_pixel_diff(predicted: &Mask, observed: &[Pixel]) -> Option<f64> {
    if observed.is_empty() || predicted.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for p in predicted.pixels() {
        sum += observed.iter().map(|o| o.distance(&p)).fold(f64::INFINITY, f64::min);
        n += 1;
    }
    Some(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalValidation {
    pub interval: usize,
    pub norad_id: u32,
    pub pixel_diff: Option<f64>,
    pub flagged: bool,
}

/// Validates every identified interval against the pixels of its track.
pub fn validate_intervals(
    out: &IdentifyOutput,
    catalog: &Catalog,
    locations: &LocationTrack,
    cfg: &IdentConfig,
    cadence_s: f64,
    flag_px: f64,
) -> Vec<IntervalValidation> {
    let ids: Vec<Option<u32>> = out.intervals.iter().map(|iv| iv.norad_id()).collect();
    validate_assignments(out, &ids, catalog, locations, cfg, cadence_s, flag_px)
}

/// Like [`validate_intervals`] but with the satellite of each interval
/// given explicitly, e.g. read back from an identification file. An id
/// missing from the catalog is flagged with no diff.
pub fn validate_assignments(
    out: &IdentifyOutput,
    norad_ids: &[Option<u32>],
    catalog: &Catalog,
    locations: &LocationTrack,
    cfg: &IdentConfig,
    cadence_s: f64,
    flag_px: f64,
) -> Vec<IntervalValidation> {
    let geom = cfg.geometry();
    out.intervals
        .iter()
        .zip(norad_ids)
        .enumerate()
        .filter_map(|(i, (iv, id))| {
            let norad_id = (*id)?;
            let track = iv.track?;
            let pixel_diff = catalog.entries.iter().position(|(r, _)| r.norad_id == norad_id).and_then(|idx| {
                let predicted =
                    reconstruct_map(catalog, idx, locations, &geom, iv.t_from - cadence_s, iv.t_to, cadence_s);
                interval_pixel_diff(&predicted, &out.tracks[track].pixels)
            });
            Some(IntervalValidation {
                interval: i,
                norad_id,
                pixel_diff,
                flagged: pixel_diff.is_none_or(|d| d > flag_px),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationStats {
    pub n: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

pub fn separation_stats(values: &[f64]) -> Option<SeparationStats> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some(SeparationStats { n: values.len(), mean, std: var.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_known_values() {
        let s = separation_stats(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert_eq!(s.std, 2.0);
        assert!(separation_stats(&[]).is_none());
    }

    #[test]
    fn pixel_diff_nearest() {
        let predicted = Mask::from_pixels(&[Pixel::new(10, 10), Pixel::new(10, 14)]);
        let observed = [Pixel::new(10, 11)];
        assert_eq!(interval_pixel_diff(&predicted, &observed), Some(2.0));
        assert_eq!(interval_pixel_diff(&predicted, &[]), None);
    }
}
