//! Pixel/direction round trips in both map frames.

use beamtrace::geometry::{direction_to_pixel, pixel_to_direction, FovModel, MapGeometry, Pixel};
use beamtrace::ingest::{FrameType, GRID_SIZE};
use beamtrace::orientation::{Attitude, Quaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disc(geom: &MapGeometry) -> Vec<Pixel> {
    (0..GRID_SIZE).flat_map(|r| (0..GRID_SIZE).map(move |c| Pixel::new(r, c))).filter(|p| geom.in_disc(p)).collect()
}

fn random_attitudes(n: usize, seed: u64) -> Vec<Attitude> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if q.norm() < 0.1 {
            continue;
        }
        if let Ok(a) = Attitude::from_quaternion(&q.normalized().unwrap()) {
            out.push(a);
        }
    }
    out
}

#[test]
fn every_disc_pixel_round_trips() {
    for model in ["hp1_proto2", "rev3_proto2"] {
        let geom = FovModel::for_hardware(model).unwrap().map_geometry();
        let pixels = disc(&geom);
        assert!(pixels.len() > 11_000);
        for att in random_attitudes(50, 7) {
            for frame in [FrameType::Earth, FrameType::Ut] {
                for p in &pixels {
                    let dir = pixel_to_direction(p, frame, &att, &geom).unwrap();
                    let back = direction_to_pixel(&dir, frame, &att, &geom).unwrap();
                    assert_eq!(back, *p, "{model} {frame:?} {att:?}");
                }
            }
        }
    }
}

#[test]
fn ut_to_earth_within_one_quantum() {
    for model in ["hp1_proto2", "rev3_proto2"] {
        let geom = FovModel::for_hardware(model).unwrap().map_geometry();
        let quantum = 2.0 * geom.zenith_max_deg / 61.0;
        let pixels = disc(&geom);
        for att in random_attitudes(50, 11) {
            for p in &pixels {
                let dir = pixel_to_direction(p, FrameType::Ut, &att, &geom).unwrap();
                // directions outside the Earth-frame disc have no pixel there
                let Ok(e) = direction_to_pixel(&dir, FrameType::Earth, &att, &geom) else { continue };
                let back = pixel_to_direction(&e, FrameType::Earth, &att, &geom).unwrap();
                let sep = back.separation_deg(&dir);
                assert!(sep <= quantum, "{model} {p:?}: {sep} > {quantum}");
            }
        }
    }
}

#[test]
fn pixels_off_the_disc_are_rejected() {
    let geom = FovModel::for_hardware("hp1_proto2").unwrap().map_geometry();
    let corner = Pixel::new(0, 0);
    assert!(!geom.in_disc(&corner));
    assert!(pixel_to_direction(&corner, FrameType::Earth, &Attitude::identity(), &geom).is_err());
}
