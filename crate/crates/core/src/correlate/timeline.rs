//! Per-slot alignment of identification results with network traces.

use super::gaps::{detect_ping_gaps, PingGap};
use crate::ident::{timeslot_of, IdentificationRow, SwitchRow, Timeslot, OUTAGE_LINK_AFTER_S, OUTAGE_LINK_BEFORE_S};
use crate::ingest::{Direction, OutageEvent, PingSample, ThroughputSample};

/// Half-width of the window around a switch used for gap overlap and the
/// before/after throughput comparison.
pub const SWITCH_WINDOW_S: f64 = 3.0;

/// Everything the timeline is built from. All times share one Unix base.
#[derive(Debug, Clone, Copy)]
pub struct TimelineInputs<'a> {
    pub identification: &'a [IdentificationRow],
    pub switches: &'a [SwitchRow],
    pub outages: &'a [OutageEvent],
    pub pings: &'a [PingSample],
    pub throughput: &'a [ThroughputSample],
    pub nominal_ping_interval_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchAnnotation {
    pub switch: SwitchRow,
    /// Index into `TimelineReport::gaps` of the gap nearest the switch
    /// among those overlapping the window.
    pub gap: Option<usize>,
    pub down_before_bps: Option<f64>,
    pub down_after_bps: Option<f64>,
    /// Index into `TimelineReport::outages`.
    pub outage: Option<usize>,
}

impl SwitchAnnotation {
    /// Relative downlink change across the switch, percent.
    pub fn down_delta_pct(&self) -> Option<f64> {
        match (self.down_before_bps, self.down_after_bps) {
            (Some(b), Some(a)) if b > 0.0 => Some((a - b) / b * 100.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageLink {
    pub outage: OutageEvent,
    /// Overlapping gaps, indices into `TimelineReport::gaps`.
    pub gaps: Vec<usize>,
    /// Switches this outage corroborates. One outage may cover several.
    pub switches: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRow {
    pub slot: Timeslot,
    /// Indices into `TimelineReport::identification`.
    pub intervals: Vec<usize>,
    pub switches: Vec<usize>,
    /// Gaps starting in this slot.
    pub gaps: Vec<usize>,
    pub mean_rtt_ms: Option<f64>,
    pub p95_rtt_ms: Option<f64>,
    pub mean_down_bps: Option<f64>,
    pub outages: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimelineReport {
    pub slots: Vec<SlotRow>,
    pub identification: Vec<IdentificationRow>,
    pub gaps: Vec<PingGap>,
    pub switches: Vec<SwitchAnnotation>,
    pub outages: Vec<OutageLink>,
    pub warnings: Vec<String>,
}

fn span(times: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    times.fold(None, |acc, (a, b)| match acc {
        None => Some((a, b)),
        Some((lo, hi)) => Some((lo.min(a), hi.max(b))),
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| sum / n as f64)
}

/// Nearest-rank percentile of a sorted slice.
fn percentile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

/// Elements of a time-sorted slice with `from <= t < to`.
fn window<T>(sorted: &[T], time: impl Fn(&T) -> f64, from: f64, to: f64) -> &[T] {
    let lo = sorted.partition_point(|x| time(x) < from);
    let hi = sorted.partition_point(|x| time(x) < to);
    &sorted[lo..hi.max(lo)]
}

fn links_to_switch(o: &OutageEvent, t: f64) -> bool {
    o.start_s() <= t + OUTAGE_LINK_AFTER_S && o.end_s() >= t - OUTAGE_LINK_BEFORE_S
}

/// Aligns all streams on 15 s slots covering both the identification and
/// the network time ranges.
pub fn build_timeline(inp: &TimelineInputs) -> TimelineReport {
    let ident_span = span(
        inp.identification
            .iter()
            .map(|r| (r.t_from, r.t_to))
            .chain(inp.switches.iter().map(|s| (s.timestamp, s.timestamp))),
    );
    let net_span = span(
        inp.pings
            .iter()
            .filter(|p| !p.lost)
            .map(|p| (p.response_timestamp, p.response_timestamp))
            .chain(inp.throughput.iter().map(|s| (s.timestamp, s.timestamp)))
            .chain(inp.outages.iter().map(|o| (o.start_s(), o.end_s()))),
    );
    if let (Some(a), Some(b)) = (ident_span, net_span) {
        if a.1 < b.0 || b.1 < a.0 {
            let msg = format!(
                "identification range [{:.3}, {:.3}] and network range [{:.3}, {:.3}] do not overlap",
                a.0, a.1, b.0, b.1
            );
            log::warn!("{msg}");
            return TimelineReport { warnings: vec![msg], ..Default::default() };
        }
    }
    let Some((t0, t1)) = span(ident_span.into_iter().chain(net_span)) else {
        return TimelineReport::default();
    };

    let gaps = detect_ping_gaps(inp.pings, inp.nominal_ping_interval_ms);
    let mut rtts: Vec<(f64, f64)> =
        inp.pings.iter().filter(|p| !p.lost).map(|p| (p.response_timestamp, p.rtt_ms)).collect();
    rtts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut down: Vec<(f64, f64)> =
        inp.throughput.iter().filter(|s| s.direction == Direction::Down).map(|s| (s.timestamp, s.bps)).collect();
    down.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut outages: Vec<OutageLink> = inp
        .outages
        .iter()
        .map(|o| OutageLink {
            outage: o.clone(),
            gaps: gaps.iter().enumerate().filter(|(_, g)| g.overlaps(o.start_s(), o.end_s())).map(|(i, _)| i).collect(),
            switches: Vec::new(),
        })
        .collect();

    let mut switches = Vec::with_capacity(inp.switches.len());
    for (si, s) in inp.switches.iter().enumerate() {
        let t = s.timestamp;
        let gap = gaps
            .iter()
            .enumerate()
            .filter(|(_, g)| g.overlaps(t - SWITCH_WINDOW_S, t + SWITCH_WINDOW_S))
            .map(|(i, g)| (i, (g.start - t).max(t - g.end).max(0.0)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i);
        // prefer the outage the identification stage already tied to this switch
        let outage = s
            .outage_start_ns
            .and_then(|ns| outages.iter().position(|l| l.outage.start_ns == ns))
            .or_else(|| outages.iter().position(|l| links_to_switch(&l.outage, t)));
        // the map only shows the new satellite a frame after the handover, so
        // a linked outage marks the end of the old link more precisely
        let pivot = outage.map_or(t, |oi| outages[oi].outage.start_s().min(t));
        // samples taken during an outage measure the outage, not the link
        let serving = |x: &&(f64, f64)| !inp.outages.iter().any(|o| x.0 >= o.start_s() && x.0 < o.end_s());
        let before = mean(window(&down, |x| x.0, pivot - SWITCH_WINDOW_S, pivot).iter().filter(serving).map(|x| x.1));
        let after = mean(
            window(&down, |x| x.0, t, t + SWITCH_WINDOW_S + 1e-9)
                .iter()
                .filter(|x| x.0 > t)
                .filter(serving)
                .map(|x| x.1),
        );
        if let Some(oi) = outage {
            outages[oi].switches.push(si);
        }
        switches.push(SwitchAnnotation {
            switch: s.clone(),
            gap,
            down_before_bps: before,
            down_after_bps: after,
            outage,
        });
    }

    // a span ending exactly on a boundary does not open the next slot; an
    // instantaneous event there does
    let last_point = inp
        .switches
        .iter()
        .map(|s| s.timestamp)
        .chain(rtts.iter().map(|x| x.0))
        .chain(inp.throughput.iter().map(|s| s.timestamp))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut slots = Vec::new();
    let mut slot = timeslot_of(t0);
    while slot.start < t1 || slot.start <= last_point || slots.is_empty() {
        let (a, b) = (slot.start, slot.end);
        let mut slot_rtts: Vec<f64> = window(&rtts, |x| x.0, a, b).iter().map(|x| x.1).collect();
        slot_rtts.sort_by(f64::total_cmp);
        slots.push(SlotRow {
            slot,
            intervals: (0..inp.identification.len())
                .filter(|&i| timeslot_of(inp.identification[i].t_from).start == a)
                .collect(),
            switches: (0..inp.switches.len()).filter(|&i| slot.contains(inp.switches[i].timestamp)).collect(),
            gaps: (0..gaps.len()).filter(|&i| slot.contains(gaps[i].start)).collect(),
            mean_rtt_ms: mean(slot_rtts.iter().copied()),
            p95_rtt_ms: percentile_sorted(&slot_rtts, 95.0),
            mean_down_bps: mean(window(&down, |x| x.0, a, b).iter().map(|x| x.1)),
            outages: (0..outages.len())
                .filter(|&i| outages[i].outage.start_s() < b && outages[i].outage.end_s() > a)
                .collect(),
        });
        slot = slot.next();
    }

    TimelineReport { slots, identification: inp.identification.to_vec(), gaps, switches, outages, warnings: Vec::new() }
}
