//! Dish-frame to earth-frame pixel mapping.

use super::{BinaryFrame, MapError, Mask};
use crate::geometry::{direction_to_pixel, pixel_to_direction, MapGeometry};
use crate::ingest::FrameType;
use crate::orientation::Attitude;

/// What was lost in a frame conversion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConversionStats {
    /// Pixels whose direction falls outside the earth-frame disc.
    pub dropped: usize,
    /// Pixels that landed on an already-set earth pixel.
    pub merged: usize,
}

/// Maps each set dish-frame pixel to the earth-frame pixel of the same sky
/// direction (nearest neighbour, no interpolation).
pub fn ut_mask_to_earth(mask: &Mask, attitude: &Attitude, geom: &MapGeometry) -> (Mask, ConversionStats) {
    let mut out = Mask::empty();
    let mut stats = ConversionStats::default();
    for px in mask.pixels() {
        let target = pixel_to_direction(&px, FrameType::Ut, attitude, geom)
            .and_then(|dir| direction_to_pixel(&dir, FrameType::Earth, attitude, geom));
        match target {
            Ok(p) if out.get(&p) => stats.merged += 1,
            Ok(p) => out.set(&p, true),
            Err(_) => stats.dropped += 1,
        }
    }
    (out, stats)
}

/// Converts a whole binarized dish-frame snapshot to the earth frame.
pub fn ut_to_earth_frame(
    frame: &BinaryFrame,
    attitude: &Attitude,
    geom: &MapGeometry,
) -> Result<(BinaryFrame, ConversionStats), MapError> {
    if frame.frame_type != FrameType::Ut {
        return Err(MapError::NotUtFrame);
    }
    let (explored, stats) = ut_mask_to_earth(&frame.explored, attitude, geom);
    let (obstructed, _) = ut_mask_to_earth(&frame.obstructed, attitude, geom);
    Ok((
        BinaryFrame {
            timestamp: frame.timestamp,
            frame_type: FrameType::Earth,
            obstructed: obstructed.and(&explored),
            explored,
        },
        stats,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pixel;

    fn geom() -> MapGeometry {
        MapGeometry::new(55.0)
    }

    fn ut_frame(pixels: &[Pixel]) -> BinaryFrame {
        BinaryFrame {
            timestamp: 0.0,
            frame_type: FrameType::Ut,
            explored: Mask::from_pixels(pixels),
            obstructed: Mask::empty(),
        }
    }

    #[test]
    fn identity_is_half_turn() {
        let g = geom();
        let pixels: Vec<Pixel> = g.disc_pixels().into_iter().step_by(37).collect();
        let (earth, stats) = ut_to_earth_frame(&ut_frame(&pixels), &Attitude::identity(), &g).unwrap();
        assert_eq!(stats, ConversionStats::default());
        for p in &pixels {
            // rotate by 180 deg about the centre
            assert!(earth.explored.get(&Pixel::new(122 - p.row, 122 - p.col)), "{p:?}");
        }
        assert_eq!(earth.explored.count(), pixels.len());
    }

    #[test]
    fn bottom_edge_follows_heading() {
        let g = geom();
        let att = Attitude::from_tilt_heading(0.0, 90.0).unwrap();
        let (earth, _) = ut_to_earth_frame(&ut_frame(&[Pixel::new(122, 61)]), &att, &g).unwrap();
        assert!(earth.explored.get(&Pixel::new(61, 122)));
    }

    #[test]
    fn empty_stays_empty() {
        let (earth, stats) = ut_to_earth_frame(&ut_frame(&[]), &Attitude::identity(), &geom()).unwrap();
        assert!(earth.explored.is_empty());
        assert_eq!(stats.dropped, 0);
    }

    #[test]
    fn tilted_edge_drops() {
        let g = geom();
        let att = Attitude::from_tilt_heading(20.0, 0.0).unwrap();
        let (earth, stats) = ut_to_earth_frame(&ut_frame(&[Pixel::new(122, 61), Pixel::new(0, 61)]), &att, &g).unwrap();
        // the forward edge dips below the earth disc, the back edge stays inside
        assert_eq!(stats.dropped, 1);
        assert_eq!(earth.explored.count(), 1);
    }

    #[test]
    fn rejects_earth_frame() {
        let mut f = ut_frame(&[]);
        f.frame_type = FrameType::Earth;
        assert_eq!(ut_to_earth_frame(&f, &Attitude::identity(), &geom()), Err(MapError::NotUtFrame));
    }
}
