//! Forward rendering of a scenario into logged streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SyntheticScenario, UtPath};
use crate::geometry::{direction_to_pixel, Catalog, MapGeometry, Pixel};
use crate::ident::timeslot_of;
use crate::ingest::{
    Direction, FrameType, LocationSource, ObstructionFrame, OutageCause, OutageEvent, PingSample, ThroughputSample,
    UtLocationRecord, UtStatusRecord,
};

/// Nominal ping interval of the rendered trace.
pub const PING_INTERVAL_S: f64 = 0.01;
const TELEMETRY_INTERVAL_S: f64 = 1.0;
/// Consecutive accrual pixels further apart than this are not joined.
const MAX_JOIN_PX: f64 = 8.0;
const RENDER_STREAM: u64 = 1 << 32;

/// Everything a terminal and its measurement host would have logged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RenderedCorpus {
    pub frames: Vec<ObstructionFrame>,
    pub status: Vec<UtStatusRecord>,
    pub locations: Vec<UtLocationRecord>,
    pub outages: Vec<OutageEvent>,
    pub pings: Vec<PingSample>,
    pub throughput: Vec<ThroughputSample>,
}

/// Pixel placement shared by rendering and by the scheduler's look-ahead.
pub(crate) struct Raster<'a> {
    pub path: &'a UtPath,
    pub catalog: &'a Catalog,
    pub geom: MapGeometry,
    pub frame_type: FrameType,
}

impl Raster<'_> {
    /// Map pixel of catalog entry `idx` at `t`, `None` off the disc.
    pub fn pixel(&self, idx: usize, t: f64) -> Option<Pixel> {
        let dir = self.catalog.look(idx, t, &self.path.observer_at(t))?;
        direction_to_pixel(&dir, self.frame_type, &self.path.attitude_at(t), &self.geom).ok()
    }
}

/// Pixels laid down by one accrual tick: a line from the previous tick's
/// pixel when the same satellite continues, else the single pixel.
pub(crate) fn stroke(prev: Option<(usize, Pixel)>, idx: usize, px: Pixel) -> Vec<Pixel> {
    match prev {
        Some((i, p)) if i == idx && p.distance(&px) <= MAX_JOIN_PX => bresenham(p, px),
        _ => vec![px],
    }
}

/// Integer line between two pixels, both ends included.
fn bresenham(a: Pixel, b: Pixel) -> Vec<Pixel> {
    let (mut x, mut y) = (a.col as i64, a.row as i64);
    let (x1, y1) = (b.col as i64, b.row as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::new();
    loop {
        out.push(Pixel::new(y as usize, x as usize));
        if x == x1 && y == y1 {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

fn render_frames(sc: &SyntheticScenario, catalog: &Catalog, rng: &mut ChaCha8Rng) -> Vec<ObstructionFrame> {
    let cfg = &sc.config;
    let raster = Raster { path: &sc.ut_path, catalog, geom: sc.fov().map_geometry(), frame_type: cfg.frame_type };
    let eps = 1e-6;
    let mut cells = ObstructionFrame::unexplored(sc.start, cfg.frame_type);
    let mut frames = Vec::with_capacity(sc.frame_times.len());
    let mut next_frame = 0;
    let mut last: Option<(usize, Pixel)> = None;
    let mut in_outage_prev = false;
    let n_ticks = ((sc.end - sc.start) / cfg.accrual_step_s).round() as usize;

    for m in 0..n_ticks {
        let t = sc.start + m as f64 * cfg.accrual_step_s;
        while next_frame < sc.frame_times.len() && sc.frame_times[next_frame] < t {
            let mut f = cells.clone();
            f.timestamp = sc.frame_times[next_frame];
            frames.push(f);
            next_frame += 1;
        }
        if sc.in_outage(t + eps) {
            if !in_outage_prev && cfg.red_pixels {
                if let Some((_, p)) = last {
                    cells.set(p.row, p.col, 0.0);
                }
            }
            in_outage_prev = true;
            last = None;
            continue;
        }
        in_outage_prev = false;
        let Some(conn) = sc.serving_at(t + eps) else { continue };
        let Some(idx) = catalog.entries.iter().position(|(r, _)| r.norad_id == conn.norad_id) else { continue };
        let Some(px) = raster.pixel(idx, t) else {
            last = None;
            continue;
        };
        for p in stroke(last, idx, px) {
            if cells.get(p.row, p.col) < 0.0 {
                let q: f32 = rng.gen_range(70..=100) as f32 / 100.0;
                cells.set(p.row, p.col, q);
            }
        }
        last = Some((idx, px));
    }
    while next_frame < sc.frame_times.len() {
        let mut f = cells.clone();
        f.timestamp = sc.frame_times[next_frame];
        frames.push(f);
        next_frame += 1;
    }
    frames
}

fn telemetry(sc: &SyntheticScenario, rng: &mut ChaCha8Rng) -> (Vec<UtStatusRecord>, Vec<UtLocationRecord>) {
    let mut status = Vec::new();
    let mut locations = Vec::new();
    // one sample either side of the span keeps interpolation defined at the edges
    let n = ((sc.end - sc.start) / TELEMETRY_INTERVAL_S).ceil() as i64;
    for k in -1..=n + 1 {
        let t = sc.start + k as f64 * TELEMETRY_INTERVAL_S;
        let att = sc.ut_path.attitude_at(t);
        let mut r = UtStatusRecord::bare(t, &sc.config.hardware_model).with_quaternion(Some(att.quaternion));
        r.tilt_deg = Some(att.tilt_deg);
        r.boresight_azimuth_deg = Some(att.boresight_azimuth_deg);
        r.boresight_elevation_deg = Some(90.0 - att.tilt_deg);
        r.attitude_estimation_state = Some(1);
        r.attitude_uncertainty_deg = Some(0.5);
        r.pop_ping_latency_ms = Some(rng.gen_range(22.0..34.0_f64).round());
        let outage = sc.in_outage(t);
        r.downlink_bps = Some(if outage { 0.0 } else { rng.gen_range(1.0e7..2.0e8_f64).round() });
        r.uplink_bps = Some(if outage { 0.0 } else { rng.gen_range(1.0e6..2.0e7_f64).round() });
        status.push(r);

        let (lat, lon) = sc.ut_path.position_at(t);
        locations.push(UtLocationRecord {
            timestamp: t,
            latitude: lat,
            longitude: lon,
            altitude_m: sc.ut_path.altitude_m,
            horizontal_speed_mps: sc.ut_path.speed_mps,
            vertical_speed_mps: 0.0,
            source: LocationSource::DishGnss,
        });
    }
    (status, locations)
}

/// True within a second after any change of serving satellite.
fn recently_switched(sc: &SyntheticScenario, t: f64, window: f64) -> bool {
    sc.schedule.iter().skip(1).any(|c| t >= c.t_from && t < c.t_from + window)
}

/// True in the remainder of a slot after a mid-slot switch.
fn degraded_after_switch(sc: &SyntheticScenario, t: f64) -> bool {
    sc.scripted_switches().iter().any(|(slot, ts)| t >= *ts && slot.contains(t))
}

fn network(sc: &SyntheticScenario, rng: &mut ChaCha8Rng) -> (Vec<PingSample>, Vec<ThroughputSample>) {
    let n = ((sc.end - sc.start) / PING_INTERVAL_S).round() as u64;
    let mut pings = Vec::with_capacity(n as usize);
    for seq in 0..n {
        let sent = sc.start + seq as f64 * PING_INTERVAL_S;
        let lost = sc.in_outage(sent) || rng.gen_bool(0.001);
        if lost {
            pings.push(PingSample { response_timestamp: sent, sequence: seq, rtt_ms: 0.0, lost: true });
            continue;
        }
        let mut rtt: f64 = 25.0 + rng.gen_range(0.0..8.0);
        if recently_switched(sc, sent, 1.0) {
            rtt += 20.0;
        }
        let rtt = (rtt * 10.0).round() / 10.0;
        let response = ((sent + rtt / 1000.0) * 1e6).round() / 1e6;
        pings.push(PingSample { response_timestamp: response, sequence: seq, rtt_ms: rtt, lost: false });
    }

    let mut throughput = Vec::new();
    let n = ((sc.end - sc.start) / 0.5).round() as usize;
    for k in 0..n {
        let t = sc.start + k as f64 * 0.5;
        let factor = if sc.in_outage(t) {
            0.0
        } else if degraded_after_switch(sc, t) {
            0.5
        } else {
            1.0
        };
        let down = (factor * rng.gen_range(1.9e8..2.1e8_f64)).round();
        let up = (factor * rng.gen_range(1.9e7..2.1e7_f64)).round();
        throughput.push(ThroughputSample { timestamp: t, direction: Direction::Down, bps: down });
        throughput.push(ThroughputSample { timestamp: t, direction: Direction::Up, bps: up });
    }
    (pings, throughput)
}

/// Renders frames, telemetry, outages and network traces for a scenario.
pub fn render(sc: &SyntheticScenario) -> RenderedCorpus {
    let catalog = Catalog::new(&sc.catalog);
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(RENDER_STREAM);
    let frames = render_frames(sc, &catalog, &mut rng);
    let (status, locations) = telemetry(sc, &mut rng);
    let (pings, throughput) = network(sc, &mut rng);
    let outages = sc
        .obstruction_script
        .iter()
        .map(|o| OutageEvent {
            start_ns: (o.start * 1e9).round() as i64,
            duration_ns: (o.duration_s * 1e9).round() as i64,
            cause: OutageCause::Obstructed,
            did_switch: o.did_switch,
        })
        .collect();
    debug_assert!(sc.schedule.iter().all(|c| timeslot_of(c.t_from) == timeslot_of(c.t_to - 1e-6)));
    RenderedCorpus { frames, status, locations, outages, pings, throughput }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bresenham_is_connected() {
        let line = bresenham(Pixel::new(10, 10), Pixel::new(13, 20));
        assert_eq!(line.first(), Some(&Pixel::new(10, 10)));
        assert_eq!(line.last(), Some(&Pixel::new(13, 20)));
        assert_eq!(line.len(), 11);
        for w in line.windows(2) {
            assert!(w[0].distance(&w[1]) < 1.5);
        }
    }
}
