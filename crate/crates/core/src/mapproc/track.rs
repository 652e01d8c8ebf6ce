//! Following segments from one diff to the next.

use std::collections::BTreeMap;

use super::ccl::{midpoint_of, Segment};
use crate::geometry::Pixel;

/// Midpoint distance within which a segment continues an existing track.
pub const DEFAULT_GATE_PX: f64 = 6.0;
/// Tracks that grew this recently stay eligible for matching.
pub const DEFAULT_RECENT_S: f64 = 3.0;

/// Result of matching one diff's segments against earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Correspondence {
    /// `(curr index, prev index, growth in pixels)`. Several current segments
    /// may continue the same previous one.
    pub matched: Vec<(usize, usize, usize)>,
    /// Current segments with no previous segment inside the gate.
    pub new: Vec<usize>,
}

/// Matches each current segment to the previous segment with the nearest
/// midpoint, if that is within `gate_px`. Ties go to the lower previous index.
pub fn track_segments(prev: &[Segment], curr: &[Segment], gate_px: f64) -> Correspondence {
    let mut out = Correspondence::default();
    for (ci, c) in curr.iter().enumerate() {
        let best = prev
            .iter()
            .enumerate()
            .map(|(pi, p)| (pi, p.midpoint.distance(&c.midpoint)))
            .filter(|&(_, d)| d <= gate_px)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((pi, _)) => out.matched.push((ci, pi, c.pixels.len())),
            None => out.new.push(ci),
        }
    }
    out
}

/// Trajectory of one satellite as seen in successive diffs.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: usize,
    pub created: f64,
    pub last_grown: f64,
    /// Most recent growth, used as the matching target.
    pub tip: Segment,
    pub pixels: Vec<Pixel>,
    /// One `(time, midpoint)` per diff in which the track grew.
    pub samples: Vec<(f64, Pixel)>,
}

/// What one diff did to the track set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackUpdate {
    pub time: f64,
    /// Tracks created by this diff, in label order.
    pub new_tracks: Vec<usize>,
    /// `(track id, pixels added)` for tracks that continued.
    pub grown: Vec<(usize, usize)>,
}

/// Stateful segment tracker.
///
/// Eligible for continuation are the tracks created by the latest diff that
/// produced new tracks, plus any track that grew within `recent_s`. Several
/// fragments joining the same track in one diff are merged into a single
/// sample; new fragments closer than the gate to each other form one track.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub tracks: Vec<Track>,
    head: Vec<usize>,
    gate_px: f64,
    recent_s: f64,
}

impl Default for Tracker {
    fn default() -> Self {
        Tracker::new(DEFAULT_GATE_PX, DEFAULT_RECENT_S)
    }
}

impl Tracker {
    pub fn new(gate_px: f64, recent_s: f64) -> Self {
        Tracker { tracks: Vec::new(), head: Vec::new(), gate_px, recent_s }
    }

    fn merged_segment(parts: &[&Segment], time: f64) -> Segment {
        let mut pixels: Vec<Pixel> = parts.iter().flat_map(|s| s.pixels.iter().copied()).collect();
        pixels.sort();
        pixels.dedup();
        Segment {
            label: parts[0].label,
            midpoint: midpoint_of(&pixels).expect("non-empty"),
            pixels,
            first_seen: time,
            last_seen: time,
        }
    }

    pub fn update(&mut self, time: f64, segments: &[Segment]) -> TrackUpdate {
        let mut eligible: Vec<usize> = self
            .tracks
            .iter()
            .filter(|t| self.head.contains(&t.id) || time - t.last_grown <= self.recent_s)
            .map(|t| t.id)
            .collect();
        eligible.sort_unstable();
        let tips: Vec<Segment> = eligible.iter().map(|&id| self.tracks[id].tip.clone()).collect();
        let corr = track_segments(&tips, segments, self.gate_px);

        let mut update = TrackUpdate { time, ..Default::default() };
        let mut by_track: BTreeMap<usize, Vec<&Segment>> = BTreeMap::new();
        for &(ci, pi, _) in &corr.matched {
            by_track.entry(eligible[pi]).or_default().push(&segments[ci]);
        }
        for (id, parts) in by_track {
            let seg = Self::merged_segment(&parts, time);
            let track = &mut self.tracks[id];
            let before = track.pixels.len();
            track.pixels.extend(seg.pixels.iter().copied());
            update.grown.push((id, track.pixels.len() - before));
            track.samples.push((time, seg.midpoint));
            track.last_grown = time;
            track.tip = Segment { first_seen: track.tip.first_seen, ..seg };
        }

        // cluster new fragments by single linkage on midpoints
        let new: Vec<&Segment> = corr.new.iter().map(|&ci| &segments[ci]).collect();
        let mut cluster: Vec<usize> = (0..new.len()).collect();
        for i in 0..new.len() {
            for j in 0..i {
                if new[i].midpoint.distance(&new[j].midpoint) <= self.gate_px {
                    let (a, b) = (cluster[i], cluster[j]);
                    let lo = a.min(b);
                    for c in cluster.iter_mut() {
                        if *c == a || *c == b {
                            *c = lo;
                        }
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<&Segment>> = BTreeMap::new();
        for (i, &c) in cluster.iter().enumerate() {
            groups.entry(c).or_default().push(new[i]);
        }
        for parts in groups.values() {
            let seg = Self::merged_segment(parts, time);
            let id = self.tracks.len();
            self.tracks.push(Track {
                id,
                created: time,
                last_grown: time,
                pixels: seg.pixels.clone(),
                samples: vec![(time, seg.midpoint)],
                tip: seg,
            });
            update.new_tracks.push(id);
        }
        if !update.new_tracks.is_empty() {
            self.head = update.new_tracks.clone();
        }
        update
    }
}
