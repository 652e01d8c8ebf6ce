//! Satellite identification and beam-switch detection.
//!
//! The pipeline binarizes each frame, differences it against its predecessor
//! in the frame's own reference, moves the newly lit pixels into the earth
//! frame with the attitude at the middle of the frame interval, labels
//! connected segments and follows them with a [`Tracker`]. A second pass walks
//! the per-diff track updates slot by slot and cuts identification intervals:
//! a new segment near the start of a slot is a regular handover, one in the
//! middle of a slot is a beam switch. Each interval is then matched against
//! the catalog.

mod interp;
mod matching;
mod output;
mod timeslot;
mod validate;

use crate::geometry::{
    pixel_to_direction, Catalog, FovModel, MapGeometry, Pixel, Topocentric, DEFAULT_ELEVATION_MASK_DEG,
};
use crate::ingest::{FrameType, ObstructionFrame, OutageEvent, UtLocationRecord, UtStatusRecord};
use crate::mapproc::{
    classify, label_mask, midpoint_of, ut_mask_to_earth, xor_diff, DiffOutcome, Segment, Track, TrackUpdate, Tracker,
    DEFAULT_GATE_PX, DEFAULT_OBSTRUCTION_THRESHOLD, DEFAULT_RECENT_S,
};
use crate::orientation::Attitude;

pub use interp::{AttitudeTrack, LocationTrack, DEFAULT_MAX_GAP_S};
pub use matching::{
    match_segment, CandidateScore, MatchConfig, MatchResult, UnidentifiedReason, DEFAULT_TAU_MATCH_DEG,
};
pub use output::{
    read_identification, read_switch_events, write_identification, write_switch_events, IdentificationRow, SwitchRow,
};
pub use timeslot::{timeslot_of, Timeslot, SLOT_LENGTH_S, SLOT_PHASE_S};
pub use validate::{
    interval_pixel_diff, reconstruct_map, separation_stats, validate_assignments, validate_intervals,
    IntervalValidation, SeparationStats, DEFAULT_PIXEL_DIFF_FLAG_PX,
};

/// New segments closer than this to a slot edge are not beam switches.
pub const DEFAULT_BOUNDARY_GUARD_S: f64 = 1.0;
/// Outage linking window around a switch: the outage must end no earlier
/// than this before the switch...
pub const OUTAGE_LINK_BEFORE_S: f64 = 3.0;
/// ...and start no later than this after it.
pub const OUTAGE_LINK_AFTER_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IdentConfig {
    pub fov: FovModel,
    pub tau_obs: f32,
    pub tau_match_deg: f64,
    pub elevation_mask_deg: f64,
    pub gate_px: f64,
    pub recent_s: f64,
    pub boundary_guard_s: f64,
    pub max_gap_s: f64,
}

impl IdentConfig {
    pub fn new(fov: FovModel) -> Self {
        IdentConfig {
            fov,
            tau_obs: DEFAULT_OBSTRUCTION_THRESHOLD,
            tau_match_deg: DEFAULT_TAU_MATCH_DEG,
            elevation_mask_deg: DEFAULT_ELEVATION_MASK_DEG,
            gate_px: DEFAULT_GATE_PX,
            recent_s: DEFAULT_RECENT_S,
            boundary_guard_s: DEFAULT_BOUNDARY_GUARD_S,
            max_gap_s: DEFAULT_MAX_GAP_S,
        }
    }

    pub fn geometry(&self) -> MapGeometry {
        self.fov.map_geometry()
    }

    pub fn match_config(&self) -> MatchConfig {
        MatchConfig {
            fov: self.fov.clone(),
            tau_match_deg: self.tau_match_deg,
            elevation_mask_deg: self.elevation_mask_deg,
        }
    }
}

/// How an interval began.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalStart {
    /// Continuation of the previous slot's satellite.
    CarryOver,
    /// First satellite seen.
    Acquisition,
    /// New segment at the start of the slot.
    Handover,
    /// New segment in the middle of the slot.
    Switch,
    /// New segment in the last second of the slot.
    Late,
}

/// One stretch of a slot attributed to a single track.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub slot: Timeslot,
    /// First and last frame time covered; equal for intervals that were
    /// superseded within the same frame.
    pub t_from: f64,
    pub t_to: f64,
    pub track: Option<usize>,
    pub start: IntervalStart,
    /// Frames assigned to this interval.
    pub n_frames: usize,
    /// Earth-frame midpoint pixel and its direction, one per diff the track grew in.
    pub samples: Vec<(f64, Pixel, Topocentric)>,
    pub result: MatchResult,
}

impl Interval {
    pub fn norad_id(&self) -> Option<u32> {
        self.result.norad_id()
    }

    pub fn score_deg(&self) -> Option<f64> {
        self.result.best.as_ref().map(|b| b.mean_separation_deg)
    }

    pub fn directions(&self) -> Vec<(f64, Topocentric)> {
        self.samples.iter().map(|&(t, _, d)| (t, d)).collect()
    }
}

/// Reactive satellite change detected in the middle of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSwitchEvent {
    pub timestamp: f64,
    pub slot_start: f64,
    pub from_norad: Option<u32>,
    pub to_norad: Option<u32>,
    pub within_slot: bool,
    pub corroborating_outage: Option<OutageEvent>,
    /// Index of the interval the switch leads into.
    pub to_interval: usize,
}

/// Identification results of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationResult {
    pub timeslot: Timeslot,
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineStats {
    pub frames: usize,
    pub diffs: usize,
    pub resets: usize,
    /// Diffs dropped because no attitude was available.
    pub skipped_no_attitude: usize,
    pub dropped_px: usize,
    pub merged_px: usize,
}

#[derive(Debug, Clone, Default)]
pub struct IdentifyOutput {
    pub intervals: Vec<Interval>,
    pub switches: Vec<BeamSwitchEvent>,
    pub tracks: Vec<Track>,
    pub stats: PipelineStats,
}

impl IdentifyOutput {
    pub fn results(&self) -> Vec<IdentificationResult> {
        let mut out: Vec<IdentificationResult> = Vec::new();
        for iv in &self.intervals {
            match out.last_mut() {
                Some(r) if r.timeslot == iv.slot => r.intervals.push(iv.clone()),
                _ => out.push(IdentificationResult { timeslot: iv.slot, intervals: vec![iv.clone()] }),
            }
        }
        out
    }

    pub fn unidentified_rate(&self) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        self.intervals.iter().filter(|i| i.norad_id().is_none()).count() as f64 / self.intervals.len() as f64
    }
}

struct DiffStep {
    t_curr: f64,
    update: TrackUpdate,
}

fn segments_of(mask: &crate::mapproc::Mask, time: f64) -> Vec<Segment> {
    label_mask(mask)
        .into_iter()
        .enumerate()
        .map(|(label, pixels)| Segment {
            label,
            midpoint: midpoint_of(&pixels).expect("non-empty component"),
            pixels,
            first_seen: time,
            last_seen: time,
        })
        .collect()
}

/// First pass: frame differencing and segment tracking.
fn track_frames(
    frames: &[ObstructionFrame],
    attitudes: &AttitudeTrack,
    cfg: &IdentConfig,
    stats: &mut PipelineStats,
) -> (Vec<DiffStep>, Tracker) {
    let geom = cfg.geometry();
    let mut tracker = Tracker::new(cfg.gate_px, cfg.recent_s);
    let mut steps = Vec::new();
    let mut prev: Option<crate::mapproc::BinaryFrame> = None;
    for frame in frames {
        stats.frames += 1;
        let curr = classify(frame, cfg.tau_obs);
        let Some(p) = prev.replace(curr.clone()) else { continue };
        if p.frame_type != curr.frame_type {
            stats.resets += 1;
            continue;
        }
        let diff = match xor_diff(&p, &curr) {
            Ok(DiffOutcome::Diff(d)) => d,
            Ok(DiffOutcome::Reset { .. }) => {
                stats.resets += 1;
                continue;
            }
            Err(e) => {
                log::warn!("skipping frame pair: {e}");
                continue;
            }
        };
        let t_mid = diff.mid_time();
        // only pixels that switched on carry trajectory information
        let lit = diff.changed.and(&curr.explored);
        let earth = match diff.frame_type {
            FrameType::Earth => lit,
            FrameType::Ut => {
                if lit.is_empty() {
                    lit
                } else {
                    let Some(att) = attitudes.at(t_mid) else {
                        stats.skipped_no_attitude += 1;
                        continue;
                    };
                    let (m, s) = ut_mask_to_earth(&lit, &att, &geom);
                    stats.dropped_px += s.dropped;
                    stats.merged_px += s.merged;
                    m
                }
            }
        };
        stats.diffs += 1;
        let update = tracker.update(t_mid, &segments_of(&earth, t_mid));
        steps.push(DiffStep { t_curr: diff.t_curr, update });
    }
    (steps, tracker)
}

fn new_interval(slot: Timeslot, t: f64, track: Option<usize>, start: IntervalStart) -> Interval {
    Interval {
        slot,
        t_from: t,
        t_to: t,
        track,
        start,
        n_frames: 0,
        samples: Vec::new(),
        result: MatchResult { best: None, reason: Some(UnidentifiedReason::NoSamples), ranked: Vec::new() },
    }
}

/// Second pass: cut intervals and find switch points. Returns the intervals
/// and, per switch, `(time, from interval, to interval)`.
fn cut_intervals(steps: &[DiffStep], tracker: &Tracker, guard_s: f64) -> (Vec<Interval>, Vec<(f64, usize, usize)>) {
    let mut intervals: Vec<Interval> = Vec::new();
    let mut switches = Vec::new();
    let mut open: Option<usize> = None;
    let mut current: Option<usize> = None;

    for step in steps {
        let slot = timeslot_of(step.t_curr);
        let mut iv = match open {
            Some(i) if intervals[i].slot == slot => i,
            _ => {
                let start = if current.is_some() { IntervalStart::CarryOver } else { IntervalStart::Acquisition };
                intervals.push(new_interval(slot, step.t_curr, current, start));
                intervals.len() - 1
            }
        };
        let mut touched = vec![iv];

        let mut new_tracks = step.update.new_tracks.clone();
        // the track that keeps growing longest is the one the dish stayed on
        new_tracks
            .sort_by(|&a, &b| tracker.tracks[a].last_grown.total_cmp(&tracker.tracks[b].last_grown).then(a.cmp(&b)));
        if !new_tracks.is_empty() {
            let t = step.t_curr;
            let cur_iv = &intervals[iv];
            let mode = if cur_iv.track.is_none() {
                IntervalStart::Acquisition
            } else if t - slot.start < guard_s && cur_iv.start == IntervalStart::CarryOver {
                IntervalStart::Handover
            } else if slot.is_mid_slot(t, guard_s) {
                IntervalStart::Switch
            } else {
                IntervalStart::Late
            };
            for (k, &track) in new_tracks.iter().enumerate() {
                let reuse = k == 0 && matches!(mode, IntervalStart::Acquisition | IntervalStart::Handover);
                if reuse {
                    intervals[iv].track = Some(track);
                    intervals[iv].start = mode;
                    intervals[iv].samples.clear();
                } else {
                    intervals.push(new_interval(slot, t, Some(track), mode));
                    let next = intervals.len() - 1;
                    if mode == IntervalStart::Switch {
                        switches.push((t, iv, next));
                    }
                    iv = next;
                    touched.push(iv);
                }
            }
            current = new_tracks.last().copied();
        }

        intervals[iv].t_to = step.t_curr;
        intervals[iv].n_frames += 1;
        open = Some(iv);

        for &i in &touched {
            let Some(track) = intervals[i].track else { continue };
            let grew = step.update.new_tracks.contains(&track) || step.update.grown.iter().any(|&(id, _)| id == track);
            if !grew {
                continue;
            }
            // directions are filled in once the geometry is known
            if let Some(&(ts, px)) = tracker.tracks[track].samples.iter().find(|(ts, _)| *ts == step.update.time) {
                intervals[i].samples.push((ts, px, Topocentric::new(0.0, 90.0)));
            }
        }
    }
    (intervals, switches)
}

/// Runs the full identification pipeline.
pub fn identify(
    frames: &[ObstructionFrame],
    status: &[UtStatusRecord],
    locations: &[UtLocationRecord],
    catalog: &Catalog,
    outages: &[OutageEvent],
    cfg: &IdentConfig,
) -> IdentifyOutput {
    let attitudes = AttitudeTrack::new(status, cfg.max_gap_s);
    let location_track = LocationTrack::new(locations, cfg.max_gap_s);
    let geom = cfg.geometry();
    let mut stats = PipelineStats::default();
    let (steps, tracker) = track_frames(frames, &attitudes, cfg, &mut stats);
    let (mut intervals, switch_points) = cut_intervals(&steps, &tracker, cfg.boundary_guard_s);

    let identity = Attitude::identity();
    let mcfg = cfg.match_config();
    for iv in &mut intervals {
        for s in &mut iv.samples {
            s.2 = pixel_to_direction(&s.1, FrameType::Earth, &identity, &geom)
                .expect("tracked pixels lie inside the disc");
        }
        iv.result = match_segment(&iv.directions(), &location_track, &attitudes, catalog, &mcfg);
    }

    let switches = switch_points
        .into_iter()
        .map(|(t, from, to)| BeamSwitchEvent {
            timestamp: t,
            slot_start: intervals[to].slot.start,
            from_norad: intervals[from].norad_id(),
            to_norad: intervals[to].norad_id(),
            within_slot: intervals[to].slot.is_mid_slot(t, cfg.boundary_guard_s),
            corroborating_outage: outages
                .iter()
                .find(|o| o.start_s() <= t + OUTAGE_LINK_AFTER_S && o.end_s() >= t - OUTAGE_LINK_BEFORE_S)
                .cloned(),
            to_interval: to,
        })
        .collect();

    IdentifyOutput { intervals, switches, tracks: tracker.tracks, stats }
}
