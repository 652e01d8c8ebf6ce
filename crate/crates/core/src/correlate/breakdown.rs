//! Outage time per cause.

use std::collections::BTreeMap;
use std::io::Write;

use crate::ingest::{OutageCause, OutageEvent};

#[derive(Debug, Clone, PartialEq)]
pub struct CauseShare {
    pub cause: OutageCause,
    pub events: usize,
    pub seconds: f64,
    /// Share of the total outage time, 0-100.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutageBreakdown {
    /// One row per cause present, ordered by label.
    pub rows: Vec<CauseShare>,
    pub total_seconds: f64,
}

impl OutageBreakdown {
    pub fn share(&self, cause: OutageCause) -> Option<&CauseShare> {
        self.rows.iter().find(|r| r.cause == cause)
    }
}

/// Groups events by cause. Durations are summed in integer nanoseconds so
/// the seconds are exact to the input resolution.
pub fn outage_breakdown(events: &[OutageEvent]) -> OutageBreakdown {
    let mut by_cause: BTreeMap<&'static str, (OutageCause, usize, i128)> = BTreeMap::new();
    for e in events {
        let entry = by_cause.entry(e.cause.label()).or_insert((e.cause, 0, 0));
        entry.1 += 1;
        entry.2 += e.duration_ns as i128;
    }
    let total_ns: i128 = by_cause.values().map(|v| v.2).sum();
    if total_ns == 0 {
        return OutageBreakdown::default();
    }
    let rows = by_cause
        .into_values()
        .map(|(cause, events, ns)| CauseShare {
            cause,
            events,
            seconds: ns as f64 / 1e9,
            percent: ns as f64 / total_ns as f64 * 100.0,
        })
        .collect();
    OutageBreakdown { rows, total_seconds: total_ns as f64 / 1e9 }
}

pub fn write_breakdown<W: Write>(mut w: W, b: &OutageBreakdown) -> std::io::Result<()> {
    writeln!(w, "cause,events,seconds,percent")?;
    for r in &b.rows {
        writeln!(w, "{},{},{:.3},{:.3}", r.cause.label(), r.events, r.seconds, r.percent)?;
    }
    Ok(())
}
