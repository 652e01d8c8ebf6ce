//! Report tables and the long-format plotting series.

use std::fmt::Write as _;
use std::io::Write;

use super::timeline::TimelineReport;
use crate::ingest::{Direction, PingSample, ThroughputSample};

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map(|v| format!("{v:.prec$}")).unwrap_or_default()
}

fn opt_id(x: Option<u32>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_timeline<W: Write>(mut w: W, rep: &TimelineReport) -> std::io::Result<()> {
    writeln!(
        w,
        "slot_start,slot_end,n_intervals,norad_ids,n_switches,n_gaps,gap_seconds,mean_rtt_ms,p95_rtt_ms,mean_down_bps,n_outages,outage_causes"
    )?;
    for row in &rep.slots {
        let ids: Vec<String> = row
            .intervals
            .iter()
            .map(|&i| rep.identification[i].norad_id.map_or("UNIDENTIFIED".to_string(), |n| n.to_string()))
            .collect();
        let gap_s: f64 = row.gaps.iter().map(|&g| rep.gaps[g].duration_s()).sum();
        let causes: Vec<&str> = row.outages.iter().map(|&o| rep.outages[o].outage.cause.label()).collect();
        writeln!(
            w,
            "{:.3},{:.3},{},{},{},{},{:.3},{},{},{},{},{}",
            row.slot.start,
            row.slot.end,
            row.intervals.len(),
            ids.join(";"),
            row.switches.len(),
            row.gaps.len(),
            gap_s,
            opt(row.mean_rtt_ms, 3),
            opt(row.p95_rtt_ms, 3),
            opt(row.mean_down_bps, 0),
            row.outages.len(),
            causes.join(";")
        )?;
    }
    Ok(())
}

pub fn write_switch_annotations<W: Write>(mut w: W, rep: &TimelineReport) -> std::io::Result<()> {
    writeln!(
        w,
        "timestamp,slot_start,from_norad,to_norad,within_slot,gap_start,gap_end,gap_seconds,down_before_bps,down_after_bps,down_delta_pct,outage_start_ns,outage_cause"
    )?;
    for a in &rep.switches {
        let gap = a.gap.map(|g| rep.gaps[g]);
        let outage = a.outage.map(|o| &rep.outages[o].outage);
        writeln!(
            w,
            "{:.3},{:.3},{},{},{},{},{},{},{},{},{},{},{}",
            a.switch.timestamp,
            a.switch.slot_start,
            opt_id(a.switch.from_norad),
            opt_id(a.switch.to_norad),
            a.switch.within_slot,
            opt(gap.map(|g| g.start), 3),
            opt(gap.map(|g| g.end), 3),
            opt(gap.map(|g| g.duration_s()), 3),
            opt(a.down_before_bps, 0),
            opt(a.down_after_bps, 0),
            opt(a.down_delta_pct(), 2),
            outage.map(|o| o.start_ns.to_string()).unwrap_or_default(),
            outage.map(|o| o.cause.label()).unwrap_or_default()
        )?;
    }
    Ok(())
}

pub fn write_outage_links<W: Write>(mut w: W, rep: &TimelineReport) -> std::io::Result<()> {
    writeln!(w, "start_ns,duration_ns,cause,did_switch,n_gaps,gap_seconds,switch_timestamps")?;
    for l in &rep.outages {
        let gap_s: f64 = l.gaps.iter().map(|&g| rep.gaps[g].duration_s()).sum();
        let sw: Vec<String> = l.switches.iter().map(|&s| format!("{:.3}", rep.switches[s].switch.timestamp)).collect();
        writeln!(
            w,
            "{},{},{},{},{},{:.3},{}",
            l.outage.start_ns,
            l.outage.duration_ns,
            l.outage.cause.label(),
            l.outage.did_switch,
            l.gaps.len(),
            gap_s,
            sw.join(";")
        )?;
    }
    Ok(())
}

/// One point of the plotting series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub timestamp: f64,
    pub metric: &'static str,
    pub value: f64,
    pub annotation: String,
}

/// Flattens the report and raw traces into `timestamp,metric,value,annotation`
/// points, ordered by time, then metric, then value.
pub fn series_points(rep: &TimelineReport, pings: &[PingSample], throughput: &[ThroughputSample]) -> Vec<SeriesPoint> {
    let mut pts = Vec::new();
    let point = |timestamp, metric, value, annotation: String| SeriesPoint { timestamp, metric, value, annotation };
    for p in pings.iter().filter(|p| !p.lost) {
        pts.push(point(p.response_timestamp, "rtt_ms", p.rtt_ms, String::new()));
    }
    for s in throughput {
        let metric = match s.direction {
            Direction::Down => "down_bps",
            Direction::Up => "up_bps",
        };
        pts.push(point(s.timestamp, metric, s.bps, String::new()));
    }
    for g in &rep.gaps {
        pts.push(point(g.start, "ping_gap_s", g.duration_s(), String::new()));
    }
    for l in &rep.outages {
        let o = &l.outage;
        let note = if o.did_switch { format!("{};switch", o.cause.label()) } else { o.cause.label().to_string() };
        pts.push(point(o.start_s(), "outage_s", o.duration_s(), note));
    }
    for a in &rep.switches {
        let s = &a.switch;
        let mut note = format!("{}->{}", opt_id(s.from_norad), opt_id(s.to_norad));
        if let Some(d) = a.down_delta_pct() {
            let _ = write!(note, ";down_delta_pct={d:.2}");
        }
        pts.push(point(s.timestamp, "beam_switch", if s.within_slot { 1.0 } else { 0.0 }, note));
    }
    for r in &rep.identification {
        let v = r.norad_id.map_or(f64::NAN, f64::from);
        pts.push(point(r.t_from, "serving_norad", v, r.satellite_name.clone()));
    }
    pts.sort_by(|a, b| {
        a.timestamp
            .total_cmp(&b.timestamp)
            .then(a.metric.cmp(b.metric))
            .then(a.value.total_cmp(&b.value))
            .then(a.annotation.cmp(&b.annotation))
    });
    pts
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_series<W: Write>(mut w: W, points: &[SeriesPoint]) -> std::io::Result<()> {
    writeln!(w, "timestamp,metric,value,annotation")?;
    for p in points {
        let value = if p.value.is_nan() { String::new() } else { p.value.to_string() };
        writeln!(w, "{:.6},{},{},{}", p.timestamp, p.metric, value, quote(&p.annotation))?;
    }
    Ok(())
}
