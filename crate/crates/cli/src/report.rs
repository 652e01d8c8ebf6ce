//! Markdown summary of a full run.

use std::io::{self, Write};

use beamtrace::ident::{IdentificationRow, PipelineStats, SwitchRow};

use crate::commands::{mean_pixel_diff, CorrelateStage, ValidateStage};

pub struct ReportData<'a> {
    pub rows: &'a [IdentificationRow],
    pub switches: &'a [SwitchRow],
    pub stats: Option<&'a PipelineStats>,
    pub validation: Option<&'a ValidateStage>,
    pub correlate: &'a CorrelateStage,
}

fn id(x: Option<u32>) -> String {
    x.map_or_else(|| "UNIDENTIFIED".to_string(), |n| n.to_string())
}

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"))
}

pub fn write_report<W: Write>(mut w: W, d: &ReportData) -> io::Result<()> {
    writeln!(w, "# beamtrace report\n")?;

    let unidentified = d.rows.iter().filter(|r| r.norad_id.is_none()).count();
    writeln!(w, "## Identification\n")?;
    writeln!(w, "- intervals: {}", d.rows.len())?;
    writeln!(w, "- unidentified intervals: {unidentified}")?;
    writeln!(w, "- beam switches: {}", d.switches.len())?;
    writeln!(w, "- slot-boundary switches: {}", d.switches.iter().filter(|s| !s.within_slot).count())?;
    if let Some(s) = d.stats {
        writeln!(
            w,
            "- frames: {}, map diffs: {}, resets: {}, diffs without attitude: {}",
            s.frames, s.diffs, s.resets, s.skipped_no_attitude
        )?;
    }
    writeln!(w)?;

    writeln!(w, "### Slots\n")?;
    writeln!(w, "| slot start | t from | t to | NORAD | satellite | score (deg) | samples | switch |")?;
    writeln!(w, "|---|---|---|---|---|---|---|---|")?;
    for r in d.rows {
        writeln!(
            w,
            "| {:.3} | {:.3} | {:.3} | {} | {} | {} | {} | {} |",
            r.slot_start,
            r.t_from,
            r.t_to,
            id(r.norad_id),
            r.satellite_name,
            opt(r.score_deg, 3),
            r.n_samples,
            if r.switch_flag { "yes" } else { "" }
        )?;
    }
    writeln!(w)?;

    let tl = &d.correlate.timeline;
    writeln!(w, "### Beam switches\n")?;
    if tl.switches.is_empty() {
        writeln!(w, "None.\n")?;
    } else {
        writeln!(w, "| time | from | to | within slot | RTT gap (s) | downlink change (%) | outage |")?;
        writeln!(w, "|---|---|---|---|---|---|---|")?;
        for a in &tl.switches {
            let s = &a.switch;
            writeln!(
                w,
                "| {:.3} | {} | {} | {} | {} | {} | {} |",
                s.timestamp,
                id(s.from_norad),
                id(s.to_norad),
                s.within_slot,
                opt(a.gap.map(|g| tl.gaps[g].duration_s()), 3),
                opt(a.down_delta_pct(), 1),
                a.outage.map_or_else(|| "-".to_string(), |o| tl.outages[o].outage.cause.label().to_string())
            )?;
        }
        writeln!(w)?;
    }

    if let Some(v) = d.validation {
        writeln!(w, "## Validation\n")?;
        writeln!(w, "- intervals checked: {}", v.validations.len())?;
        writeln!(w, "- flagged: {}", v.validations.iter().filter(|x| x.flagged).count())?;
        writeln!(w, "- mean pixel difference: {}", opt(mean_pixel_diff(&v.validations), 3))?;
        if let Some(s) = v.separation {
            writeln!(w, "- angular separation: mean {:.3} deg, std {:.3} deg over {} intervals", s.mean, s.std, s.n)?;
        }
        writeln!(w)?;
    }

    let b = &d.correlate.breakdown;
    writeln!(w, "## Outage breakdown\n")?;
    if b.rows.is_empty() {
        writeln!(w, "No outages.\n")?;
    } else {
        writeln!(w, "| cause | events | seconds | % of outages |")?;
        writeln!(w, "|---|---|---|---|")?;
        for r in &b.rows {
            writeln!(w, "| {} | {} | {:.3} | {:.3} |", r.cause.label(), r.events, r.seconds, r.percent)?;
        }
        writeln!(
            w,
            "| total | {} | {:.3} | 100.000 |\n",
            b.rows.iter().map(|r| r.events).sum::<usize>(),
            b.total_seconds
        )?;
    }

    writeln!(w, "## Timeline\n")?;
    for warning in &tl.warnings {
        writeln!(w, "Warning: {warning}\n")?;
    }
    writeln!(w, "| slot start | intervals | switches | ping gaps | mean RTT (ms) | p95 RTT (ms) | mean downlink (Mbps) | outages |")?;
    writeln!(w, "|---|---|---|---|---|---|---|---|")?;
    for s in &tl.slots {
        writeln!(
            w,
            "| {:.3} | {} | {} | {} | {} | {} | {} | {} |",
            s.slot.start,
            s.intervals.len(),
            s.switches.len(),
            s.gaps.len(),
            opt(s.mean_rtt_ms, 1),
            opt(s.p95_rtt_ms, 1),
            opt(s.mean_down_bps.map(|b| b / 1e6), 1),
            s.outages.len()
        )?;
    }
    Ok(())
}
