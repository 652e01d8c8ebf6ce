//! Synthetic ground-truth scenarios.
//!
//! A scenario places a constellation of circular orbits over a simulated
//! terminal, scripts which satellite serves it when, and renders the frame,
//! telemetry and network streams the terminal would have logged. The scripted
//! schedule is the oracle the identification pipeline is checked against.

mod corpus;
mod render;
mod tle_gen;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{in_fov, Catalog, FovModel, Observer, Pixel, Topocentric, DEFAULT_ELEVATION_MASK_DEG};
use crate::ident::{timeslot_of, Timeslot, SLOT_LENGTH_S};
use crate::ingest::{FrameType, TleRecord};
use crate::mapproc::Mask;
use crate::orientation::{Attitude, Quaternion};

pub use corpus::{read_ground_truth, write_corpus, write_ground_truth, CorpusFiles, GroundTruthRow};
pub use render::{render, RenderedCorpus, PING_INTERVAL_S};
use render::{stroke, Raster};
pub use tle_gen::{epoch_field, mean_motion_rev_day, orbit_through, CircularOrbit};

/// First slot start used by generated scenarios (2025-06-01T00:00:12Z).
pub const BASE_START: f64 = 1_748_736_012.0;
const METRES_PER_DEG_LAT: f64 = 111_320.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    /// No schedule satisfies the configured margins.
    #[error("infeasible scenario at t={time:.1}: {reason}")]
    Infeasible { time: f64, reason: String },
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MotionKind {
    Stationary,
    Turning,
    /// Stationary or turning, drawn per seed.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_satellites: usize,
    /// Direct-to-cell units added on top of `n_satellites`.
    pub n_dtc: usize,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub n_slots: usize,
    pub hardware_model: String,
    pub tilt_deg: f64,
    pub motion: MotionKind,
    pub speed_mps: f64,
    /// Turn rates are drawn from this range, either direction.
    pub turn_rate_deg_s: (f64, f64),
    /// Probability that a slot carries a scripted mid-slot switch.
    pub switch_density: f64,
    pub outage_duration_s: f64,
    pub frame_cadence_s: f64,
    pub frame_jitter_s: f64,
    pub accrual_step_s: f64,
    pub frame_type: FrameType,
    pub elevation_mask_deg: f64,
    /// Scheduled satellites stay this far inside the cone and disc.
    pub fov_margin_deg: f64,
    /// Scheduled satellites stay this far from every other candidate.
    pub min_separation_deg: f64,
    /// A newly served satellite starts this far from every earlier track end.
    pub switch_separation_deg: f64,
    pub min_candidates: usize,
    /// Mark the pixel under an obstruction onset as obstructed.
    pub red_pixels: bool,
    /// Constellation redraws before giving up.
    pub max_attempts: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_satellites: 60,
            n_dtc: 3,
            altitude_km: 550.0,
            inclination_deg: 53.0,
            n_slots: 4,
            hardware_model: "hp1_proto2".into(),
            tilt_deg: 7.9,
            motion: MotionKind::Mixed,
            speed_mps: 20.0,
            turn_rate_deg_s: (2.0, 5.0),
            switch_density: 0.5,
            outage_duration_s: 1.28,
            frame_cadence_s: 0.5,
            frame_jitter_s: 0.02,
            accrual_step_s: 0.1,
            frame_type: FrameType::Ut,
            elevation_mask_deg: DEFAULT_ELEVATION_MASK_DEG,
            fov_margin_deg: 3.0,
            min_separation_deg: 5.0,
            switch_separation_deg: 12.0,
            min_candidates: 3,
            red_pixels: false,
            max_attempts: 12,
        }
    }
}

impl SynthConfig {
    pub fn fov(&self) -> Result<FovModel, SynthError> {
        FovModel::for_hardware(&self.hardware_model)
            .ok_or_else(|| SynthError::InvalidConfig(format!("unknown hardware model '{}'", self.hardware_model)))
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if self.n_slots == 0 {
            return bad("n_slots must be positive");
        }
        if !(self.frame_cadence_s > 0.0 && self.accrual_step_s > 0.0 && self.accrual_step_s <= self.frame_cadence_s) {
            return bad("need 0 < accrual_step_s <= frame_cadence_s");
        }
        if self.frame_jitter_s < 0.0 || self.frame_jitter_s * 4.0 >= self.frame_cadence_s {
            return bad("frame_jitter_s must be small against the cadence");
        }
        if !(0.0..=1.0).contains(&self.switch_density) {
            return bad("switch_density must be within [0, 1]");
        }
        if !(0.0..3.0).contains(&self.outage_duration_s) {
            return bad("outage_duration_s must be within [0, 3)");
        }
        if !(0.0..30.0).contains(&self.tilt_deg) {
            return bad("tilt_deg must be within [0, 30)");
        }
        self.fov()?;
        Ok(())
    }
}

/// Terminal trajectory: constant speed and constant turn rate from `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtPath {
    pub t0: f64,
    pub latitude: f64,
    pub longitude: f64,
    pub altitude_m: f64,
    pub speed_mps: f64,
    pub heading0_deg: f64,
    pub turn_rate_deg_s: f64,
    pub tilt_deg: f64,
}

impl UtPath {
    pub fn heading_at(&self, t: f64) -> f64 {
        (self.heading0_deg + self.turn_rate_deg_s * (t - self.t0)).rem_euclid(360.0)
    }

    /// Flat-earth dead reckoning, adequate for minutes of driving.
    pub fn position_at(&self, t: f64) -> (f64, f64) {
        let dt = t - self.t0;
        let h0 = self.heading0_deg.to_radians();
        let w = self.turn_rate_deg_s.to_radians();
        let (north, east) = if w.abs() < 1e-12 {
            (self.speed_mps * dt * h0.cos(), self.speed_mps * dt * h0.sin())
        } else {
            let h1 = h0 + w * dt;
            (self.speed_mps * (h1.sin() - h0.sin()) / w, -self.speed_mps * (h1.cos() - h0.cos()) / w)
        };
        let lat = self.latitude + north / METRES_PER_DEG_LAT;
        let lon = self.longitude + east / (METRES_PER_DEG_LAT * self.latitude.to_radians().cos());
        (lat, (lon + 180.0).rem_euclid(360.0) - 180.0)
    }

    pub fn observer_at(&self, t: f64) -> Observer {
        let (lat, lon) = self.position_at(t);
        Observer::new(lat, lon, self.altitude_m)
    }

    pub fn quaternion_at(&self, t: f64) -> Quaternion {
        Quaternion::from_tait_bryan(self.heading_at(t), -self.tilt_deg, 0.0)
    }

    pub fn attitude_at(&self, t: f64) -> Attitude {
        Attitude::from_quaternion(&self.quaternion_at(t)).expect("path tilt is within range")
    }

    pub fn is_turning(&self) -> bool {
        self.turn_rate_deg_s != 0.0
    }
}

/// Ground-truth connection of the terminal to one satellite.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub t_from: f64,
    pub t_to: f64,
    pub norad_id: u32,
}

/// Line-of-sight loss ending in a switch when `did_switch` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptedObstruction {
    pub start: f64,
    pub duration_s: f64,
    pub did_switch: bool,
}

impl ScriptedObstruction {
    pub fn end(&self) -> f64 {
        self.start + self.duration_s
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end()
    }
}

/// What happens within one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlotPlan {
    /// One satellite for the whole slot.
    Plain,
    /// Obstruction, then a different satellite from `at` (seconds into the slot).
    Switch { at: f64 },
    /// As `Switch`, but a short-lived satellite is tried for `decoy_s` first, so
    /// two segments appear in the same frame.
    Decoy { at: f64, decoy_s: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenario {
    pub seed: u64,
    pub config: SynthConfig,
    pub start: f64,
    pub end: f64,
    pub catalog: Vec<TleRecord>,
    pub ut_path: UtPath,
    pub plans: Vec<SlotPlan>,
    pub schedule: Vec<Connection>,
    pub obstruction_script: Vec<ScriptedObstruction>,
    pub frame_cadence_s: f64,
    pub frame_times: Vec<f64>,
}

impl SyntheticScenario {
    pub fn fov(&self) -> FovModel {
        self.config.fov().expect("validated at generation")
    }

    pub fn serving_at(&self, t: f64) -> Option<&Connection> {
        self.schedule.iter().find(|c| t >= c.t_from && t < c.t_to)
    }

    pub fn in_outage(&self, t: f64) -> bool {
        self.obstruction_script.iter().any(|o| o.contains(t))
    }

    /// Schedule entries; they never straddle a slot boundary.
    pub fn truth_intervals(&self) -> Vec<(Timeslot, &Connection)> {
        self.schedule.iter().map(|c| (timeslot_of(c.t_from), c)).collect()
    }

    /// Scripted mid-slot switches as `(slot, time)`.
    pub fn scripted_switches(&self) -> Vec<(Timeslot, f64)> {
        self.schedule
            .windows(2)
            .filter(|w| timeslot_of(w[0].t_from) == timeslot_of(w[1].t_from))
            .map(|w| (timeslot_of(w[1].t_from), w[1].t_from))
            .collect()
    }

    pub fn slots(&self) -> Vec<Timeslot> {
        let mut s = timeslot_of(self.start);
        let mut out = Vec::new();
        while s.start < self.end {
            out.push(s);
            s = s.next();
        }
        out
    }
}

/// Sky state sampled on a regular grid over the scenario span.
struct LookTable {
    t0: f64,
    step: f64,
    /// `dirs[j][s]`: direction to satellite `s` at grid time `j`.
    dirs: Vec<Vec<Option<Topocentric>>>,
    /// Non-DTC satellites inside the cone and above the mask.
    visible: Vec<Vec<usize>>,
    /// Satellites that could serve at grid time `j`.
    good: Vec<Vec<bool>>,
}

impl LookTable {
    fn new(
        catalog: &Catalog,
        path: &UtPath,
        fov: &FovModel,
        cfg: &SynthConfig,
        t0: f64,
        t1: f64,
    ) -> Result<LookTable, SynthError> {
        let step = 0.5;
        let n = ((t1 - t0) / step).ceil() as usize;
        let min_elev = cfg.elevation_mask_deg.max(90.0 - fov.half_angle_deg()) + cfg.fov_margin_deg;
        let max_off = fov.half_angle_deg() - cfg.fov_margin_deg;
        let mut table = LookTable { t0, step, dirs: Vec::new(), visible: Vec::new(), good: Vec::new() };
        for j in 0..=n {
            let t = t0 + j as f64 * step;
            let obs = path.observer_at(t);
            let att = path.attitude_at(t);
            let dirs: Vec<Option<Topocentric>> = (0..catalog.len()).map(|s| catalog.look(s, t, &obs)).collect();
            let visible: Vec<usize> = (0..catalog.len())
                .filter(|&s| !catalog.entries[s].0.is_dtc)
                .filter(|&s| {
                    dirs[s].is_some_and(|d| d.elevation_deg >= cfg.elevation_mask_deg && in_fov(&d, &att, fov))
                })
                .collect();
            if visible.len() < cfg.min_candidates {
                return Err(SynthError::Infeasible {
                    time: t,
                    reason: format!("{} satellites in view, need {}", visible.len(), cfg.min_candidates),
                });
            }
            let bore = att.boresight_ned();
            let good = (0..catalog.len())
                .map(|s| {
                    let Some(d) = dirs[s] else { return false };
                    !catalog.entries[s].0.is_dtc
                        && d.elevation_deg >= min_elev
                        && d.to_ned().angle_to(bore).to_degrees() <= max_off
                        && visible
                            .iter()
                            .filter(|&&v| v != s)
                            .all(|&v| dirs[v].is_some_and(|dv| dv.separation_deg(&d) >= cfg.min_separation_deg))
                })
                .collect();
            table.dirs.push(dirs);
            table.visible.push(visible);
            table.good.push(good);
        }
        Ok(table)
    }

    fn index_range(&self, a: f64, b: f64) -> std::ops::RangeInclusive<usize> {
        let last = self.dirs.len() - 1;
        let lo = ((a - self.t0) / self.step - 1.0).floor().max(0.0) as usize;
        let hi = (((b - self.t0) / self.step).ceil() as usize + 1).min(last);
        lo.min(last)..=hi
    }

    fn good_over(&self, s: usize, a: f64, b: f64) -> bool {
        self.index_range(a, b).all(|j| self.good[j][s])
    }

    fn dir_at(&self, s: usize, t: f64) -> Option<Topocentric> {
        let j = (((t - self.t0) / self.step).round().max(0.0) as usize).min(self.dirs.len() - 1);
        self.dirs[j][s]
    }
}

/// Longest run of already-explored track, in pixels, that a stint may cross.
const MAX_STALL_PX: f64 = 3.0;
/// A new stint must show fresh pixels within this many accrual ticks.
const FIRST_FRESH_TICKS: usize = 3;

struct Scheduler<'a> {
    table: &'a LookTable,
    cfg: &'a SynthConfig,
    catalog: &'a Catalog,
    raster: Raster<'a>,
    start: f64,
    /// Pixels of everything scheduled so far, as the frames will show them.
    explored: Mask,
    /// Last directions of every finished or interrupted stint.
    tips: Vec<Topocentric>,
    schedule: Vec<Connection>,
    obstructions: Vec<ScriptedObstruction>,
}

impl Scheduler<'_> {
    fn ticks(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let step = self.cfg.accrual_step_s;
        let first = ((a - self.start) / step - 1e-6).ceil().max(0.0) as usize;
        (first..).map(move |m| self.start + m as f64 * step).take_while(move |t| t + 1e-6 < b)
    }

    /// Pixels satellite `s` would add over `[a, b)`, or `None` when the new
    /// track would be hidden under explored pixels: no fresh pixel right
    /// away, or a stretch of old track long enough to break it up.
    fn trace(&self, s: usize, a: f64, b: f64) -> Option<Vec<Pixel>> {
        let mut prev = None;
        let mut last_fresh: Option<Pixel> = None;
        let mut added = Mask::empty();
        for (k, t) in self.ticks(a, b).enumerate() {
            let px = self.raster.pixel(s, t)?;
            let fresh: Vec<Pixel> =
                stroke(prev, s, px).into_iter().filter(|p| !self.explored.get(p) && !added.get(p)).collect();
            prev = Some((s, px));
            if fresh.is_empty() {
                if last_fresh.is_none() && k + 1 >= FIRST_FRESH_TICKS {
                    return None;
                }
                continue;
            }
            if last_fresh.is_some_and(|l| l.distance(&px) > MAX_STALL_PX) {
                return None;
            }
            last_fresh = Some(px);
            for p in &fresh {
                added.set(p, true);
            }
        }
        last_fresh.map(|_| added.pixels().collect())
    }

    /// Random satellite that can serve `[a, b)`, starts clear of all tips and
    /// leaves a visible track until `b_acc`.
    fn pick(
        &self,
        rng: &mut ChaCha8Rng,
        a: f64,
        b: f64,
        b_acc: f64,
        extra_tips: &[Topocentric],
    ) -> Result<(usize, Vec<Pixel>), SynthError> {
        let sep = self.cfg.switch_separation_deg;
        let clear = |s: usize| {
            self.table.index_range(a, a + 1.5).all(|j| {
                let Some(d) = self.table.dirs[j][s] else { return false };
                self.tips.iter().chain(extra_tips).all(|tip| tip.separation_deg(&d) >= sep)
            })
        };
        let mut options: Vec<usize> =
            (0..self.catalog.len()).filter(|&s| self.table.good_over(s, a, b) && clear(s)).collect();
        options.shuffle(rng);
        options.into_iter().find_map(|s| Some((s, self.trace(s, a, b_acc)?))).ok_or_else(|| SynthError::Infeasible {
            time: a,
            reason: format!("no satellite can serve [{a:.1}, {b:.1}) with the required margins"),
        })
    }

    fn serve(&mut self, (s, pixels): (usize, Vec<Pixel>), a: f64, b: f64, b_acc: f64) -> usize {
        self.schedule.push(Connection { t_from: a, t_to: b, norad_id: self.catalog.entries[s].0.norad_id });
        if let Some(d) = self.table.dir_at(s, b_acc) {
            self.tips.push(d);
        }
        for p in &pixels {
            self.explored.set(p, true);
        }
        s
    }

    fn plan_slot(&mut self, rng: &mut ChaCha8Rng, slot: Timeslot, plan: SlotPlan) -> Result<(), SynthError> {
        let (s, e) = (slot.start, slot.end);
        let outage = self.cfg.outage_duration_s;
        match plan {
            SlotPlan::Plain => {
                let a = self.pick(rng, s, e, e, &[])?;
                self.serve(a, s, e, e);
            }
            SlotPlan::Switch { at } => {
                let t = s + at;
                let a = self.pick(rng, s, t, t - outage, &[])?;
                let a = self.serve(a, s, t, t - outage);
                let extra: Vec<Topocentric> = self.table.dir_at(a, t).into_iter().collect();
                let b = self.pick(rng, t, e, e, &extra)?;
                self.serve(b, t, e, e);
                self.obstructions.push(ScriptedObstruction { start: t - outage, duration_s: outage, did_switch: true });
            }
            SlotPlan::Decoy { at, decoy_s } => {
                let t = s + at;
                let a = self.pick(rng, s, t, t - outage, &[])?;
                let a = self.serve(a, s, t, t - outage);
                let extra: Vec<Topocentric> = self.table.dir_at(a, t).into_iter().collect();
                let d = self.pick(rng, t, t + decoy_s, t + decoy_s, &extra)?;
                self.serve(d, t, t + decoy_s, t + decoy_s);
                let c = self.pick(rng, t + decoy_s, e, e, &extra)?;
                self.serve(c, t + decoy_s, e, e);
                self.obstructions.push(ScriptedObstruction { start: t - outage, duration_s: outage, did_switch: true });
            }
        }
        Ok(())
    }
}

fn snap_to_tick(t: f64, t0: f64, step: f64) -> f64 {
    t0 + ((t - t0) / step).round() * step
}

fn draw_constellation(
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    path: &UtPath,
    start: f64,
    end: f64,
) -> Result<Vec<TleRecord>, SynthError> {
    let mut ids = BTreeSet::new();
    while ids.len() < cfg.n_satellites + cfg.n_dtc {
        ids.insert(rng.gen_range(44_000u32..60_000));
    }
    let ids: Vec<u32> = ids.into_iter().collect();
    // interleave DTC units through the id range
    let mut dtc = BTreeSet::new();
    while dtc.len() < cfg.n_dtc {
        dtc.insert(rng.gen_range(0..ids.len()));
    }
    let mut out = Vec::with_capacity(ids.len());
    for (k, &id) in ids.iter().enumerate() {
        let name = if dtc.contains(&k) { format!("STARLINK-{id} [DTC]") } else { format!("STARLINK-{id}") };
        let mut placed = None;
        for _ in 0..200 {
            let t_pass = rng.gen_range(start - 120.0..end + 120.0);
            let dir = Topocentric::new(rng.gen_range(0.0..360.0), rng.gen_range(25.0..88.0));
            let asc = rng.gen_bool(0.5);
            placed = orbit_through(
                id,
                &name,
                start,
                &path.observer_at(t_pass),
                &dir,
                t_pass,
                cfg.altitude_km,
                cfg.inclination_deg,
                asc,
            );
            if placed.is_some() {
                break;
            }
        }
        let orbit = placed.ok_or_else(|| SynthError::Infeasible {
            time: start,
            reason: format!("cannot place satellites at {}° inclination over this site", cfg.inclination_deg),
        })?;
        out.push(orbit.to_tle());
    }
    Ok(out)
}

fn draw_plans(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> Vec<SlotPlan> {
    (0..cfg.n_slots)
        .map(|_| {
            if rng.gen_bool(cfg.switch_density) {
                SlotPlan::Switch { at: rng.gen_range(3.0..=SLOT_LENGTH_S - 4.0) }
            } else {
                SlotPlan::Plain
            }
        })
        .collect()
}

/// Explicit choices for [`build_scenario`]; `None` fields are drawn.
#[derive(Debug, Clone, Default)]
pub struct ScenarioOverrides {
    pub plans: Option<Vec<SlotPlan>>,
    pub turning: Option<bool>,
    pub start: Option<f64>,
}

fn attempt(
    seed: u64,
    rng: &mut ChaCha8Rng,
    cfg: &SynthConfig,
    overrides: &ScenarioOverrides,
) -> Result<SyntheticScenario, SynthError> {
    let fov = cfg.fov()?;
    let start = overrides.start.unwrap_or_else(|| BASE_START + 900.0 * rng.gen_range(0..20_000) as f64);
    let end = start + cfg.n_slots as f64 * SLOT_LENGTH_S;
    let turning = overrides.turning.unwrap_or_else(|| match cfg.motion {
        MotionKind::Stationary => false,
        MotionKind::Turning => true,
        MotionKind::Mixed => rng.gen_bool(0.5),
    });
    let rate = if turning {
        let r = rng.gen_range(cfg.turn_rate_deg_s.0..=cfg.turn_rate_deg_s.1);
        if rng.gen_bool(0.5) {
            r
        } else {
            -r
        }
    } else {
        0.0
    };
    let path = UtPath {
        t0: start,
        latitude: rng.gen_range(-50.0..50.0),
        longitude: rng.gen_range(-180.0..180.0),
        altitude_m: rng.gen_range(0.0..1500.0),
        speed_mps: if turning { cfg.speed_mps } else { 0.0 },
        heading0_deg: rng.gen_range(0.0..360.0),
        turn_rate_deg_s: rate,
        tilt_deg: cfg.tilt_deg,
    };
    let mut plans = overrides.plans.clone().unwrap_or_else(|| draw_plans(rng, cfg));
    plans.resize(cfg.n_slots, SlotPlan::Plain);
    // switch times sit on the accrual grid so rendering is exact
    for p in plans.iter_mut() {
        match p {
            SlotPlan::Switch { at } | SlotPlan::Decoy { at, .. } => *at = snap_to_tick(*at, 0.0, cfg.accrual_step_s),
            SlotPlan::Plain => {}
        }
    }

    let n_frames = ((end - start) / cfg.frame_cadence_s).round() as usize;
    let frame_times: Vec<f64> = (0..=n_frames)
        .map(|k| {
            let jitter =
                if cfg.frame_jitter_s > 0.0 { rng.gen_range(-cfg.frame_jitter_s..cfg.frame_jitter_s) } else { 0.0 };
            let nominal = start + k as f64 * cfg.frame_cadence_s;
            // the first frame is the empty reference
            if k == 0 {
                nominal - cfg.frame_cadence_s / 2.0
            } else {
                // the closing frame stays inside the last slot
                (nominal + jitter).min(end - 1e-3)
            }
        })
        .collect();

    let tles = draw_constellation(rng, cfg, &path, start, end)?;
    let catalog = Catalog::new(&tles);
    let table = LookTable::new(&catalog, &path, &fov, cfg, start, end)?;
    let mut sched = Scheduler {
        table: &table,
        cfg,
        catalog: &catalog,
        raster: Raster { path: &path, catalog: &catalog, geom: fov.map_geometry(), frame_type: cfg.frame_type },
        start,
        explored: Mask::empty(),
        tips: Vec::new(),
        schedule: Vec::new(),
        obstructions: Vec::new(),
    };
    let mut slot = timeslot_of(start);
    for &plan in &plans {
        sched.plan_slot(rng, slot, plan)?;
        slot = slot.next();
    }
    let Scheduler { schedule, obstructions, .. } = sched;
    Ok(SyntheticScenario {
        seed,
        config: cfg.clone(),
        start,
        end,
        catalog: tles,
        ut_path: path,
        plans,
        schedule,
        obstruction_script: obstructions,
        frame_cadence_s: cfg.frame_cadence_s,
        frame_times,
    })
}

/// Builds a scenario, redrawing the constellation up to `max_attempts` times
/// when the margins cannot be met.
pub fn build_scenario(
    seed: u64,
    cfg: &SynthConfig,
    overrides: &ScenarioOverrides,
) -> Result<SyntheticScenario, SynthError> {
    cfg.validate()?;
    if let Some(start) = overrides.start {
        if timeslot_of(start).start != start {
            return Err(SynthError::InvalidConfig(format!("start {start} is not a slot boundary")));
        }
    }
    let mut last = None;
    for k in 0..cfg.max_attempts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        match attempt(seed, &mut rng, cfg, overrides) {
            Ok(s) => return Ok(s),
            Err(e @ SynthError::InvalidConfig(_)) => return Err(e),
            Err(e) => {
                log::debug!("seed {seed} attempt {k}: {e}");
                last = Some(e);
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Random scenario at the given configuration.
pub fn generate_scenario(seed: u64, cfg: &SynthConfig) -> Result<SyntheticScenario, SynthError> {
    build_scenario(seed, cfg, &ScenarioOverrides::default())
}

/// Two-slot re-creation of a turning terminal: an arc, an obstruction followed
/// by two simultaneous new segments of which only one keeps growing, a
/// regular handover, and a later single switch.
pub fn switch_replay_scenario(seed: u64) -> Result<SyntheticScenario, SynthError> {
    let cfg =
        SynthConfig { n_slots: 2, motion: MotionKind::Turning, turn_rate_deg_s: (3.0, 4.0), ..SynthConfig::default() };
    // the decoy starts just after a frame and is gone before the next one
    let overrides = ScenarioOverrides {
        plans: Some(vec![SlotPlan::Decoy { at: 6.1, decoy_s: 0.2 }, SlotPlan::Switch { at: 8.0 }]),
        turning: Some(true),
        start: None,
    };
    build_scenario(seed, &cfg, &overrides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = generate_scenario(7, &SynthConfig::default()).unwrap();
        let b = generate_scenario(7, &SynthConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(8, &SynthConfig::default()).unwrap();
        assert_ne!(a.catalog, c.catalog);
    }

    #[test]
    fn schedule_partitions_span() {
        let s = generate_scenario(1, &SynthConfig::default()).unwrap();
        assert_eq!(s.schedule.first().unwrap().t_from, s.start);
        assert!((s.schedule.last().unwrap().t_to - s.end).abs() < 1e-9);
        for w in s.schedule.windows(2) {
            assert!((w[0].t_to - w[1].t_from).abs() < 1e-9);
        }
        for c in &s.schedule {
            assert_eq!(timeslot_of(c.t_from), timeslot_of(c.t_to - 1e-6));
        }
    }

    #[test]
    fn scheduled_satellites_stay_in_fov() {
        let s = generate_scenario(3, &SynthConfig::default()).unwrap();
        let catalog = Catalog::new(&s.catalog);
        let fov = s.fov();
        for c in &s.schedule {
            let idx = catalog.entries.iter().position(|(r, _)| r.norad_id == c.norad_id).unwrap();
            let mut t = c.t_from;
            while t < c.t_to {
                let d = catalog.look(idx, t, &s.ut_path.observer_at(t)).unwrap();
                assert!(in_fov(&d, &s.ut_path.attitude_at(t), &fov));
                assert!(d.elevation_deg >= DEFAULT_ELEVATION_MASK_DEG);
                t += 0.5;
            }
        }
    }

    #[test]
    fn zero_density_switches_only_at_slot_starts() {
        let cfg = SynthConfig { switch_density: 0.0, ..SynthConfig::default() };
        let s = generate_scenario(5, &cfg).unwrap();
        assert!(s.scripted_switches().is_empty());
        assert!(s.obstruction_script.is_empty());
        for c in &s.schedule {
            assert_eq!(timeslot_of(c.t_from).start, c.t_from);
        }
    }

    #[test]
    fn single_satellite_is_infeasible() {
        let cfg = SynthConfig {
            n_satellites: 1,
            n_dtc: 0,
            motion: MotionKind::Turning,
            max_attempts: 2,
            ..SynthConfig::default()
        };
        assert!(matches!(generate_scenario(1, &cfg), Err(SynthError::Infeasible { .. })));
    }

    #[test]
    fn path_turns_in_place_when_slow() {
        let p = UtPath {
            t0: 0.0,
            latitude: 10.0,
            longitude: 179.9999,
            altitude_m: 0.0,
            speed_mps: 20.0,
            heading0_deg: 90.0,
            turn_rate_deg_s: 0.0,
            tilt_deg: 5.0,
        };
        let (lat, lon) = p.position_at(10.0);
        assert!((lat - 10.0).abs() < 1e-9);
        assert!(lon < -179.99);
        let q = UtPath { turn_rate_deg_s: 4.0, ..p };
        // a full circle returns to the start
        let (lat, lon) = q.position_at(90.0);
        assert!((lat - 10.0).abs() < 1e-9 && (lon - 179.9999).abs() < 1e-9);
    }
}
