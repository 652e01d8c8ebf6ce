//! Identification and switch-event record streams.

use std::io::{Read, Write};

use super::{BeamSwitchEvent, IdentifyOutput};
use crate::geometry::Catalog;
use crate::ingest::{read_csv_log, IngestError, Parsed};

pub const IDENTIFICATION_COLUMNS: [&str; 8] =
    ["slot_start", "t_from", "t_to", "norad_id", "satellite_name", "score_deg", "n_samples", "switch_flag"];
pub const SWITCH_COLUMNS: [&str; 6] =
    ["timestamp", "slot_start", "from_norad", "to_norad", "within_slot", "outage_start_ns"];
const UNIDENTIFIED: &str = "UNIDENTIFIED";

/// One row of the identification stream. `norad_id` is `None` for
/// unidentified intervals, whose `satellite_name` holds the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationRow {
    pub slot_start: f64,
    pub t_from: f64,
    pub t_to: f64,
    pub norad_id: Option<u32>,
    pub satellite_name: String,
    pub score_deg: Option<f64>,
    pub n_samples: usize,
    /// Interval was entered through a beam switch.
    pub switch_flag: bool,
}

/// Parsed switch-event row.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchRow {
    pub timestamp: f64,
    pub slot_start: f64,
    pub from_norad: Option<u32>,
    pub to_norad: Option<u32>,
    pub within_slot: bool,
    pub outage_start_ns: Option<i64>,
}

impl SwitchRow {
    pub fn from_event(e: &BeamSwitchEvent) -> SwitchRow {
        SwitchRow {
            timestamp: e.timestamp,
            slot_start: e.slot_start,
            from_norad: e.from_norad,
            to_norad: e.to_norad,
            within_slot: e.within_slot,
            outage_start_ns: e.corroborating_outage.as_ref().map(|o| o.start_ns),
        }
    }
}

impl IdentificationRow {
    pub fn from_output(out: &IdentifyOutput, catalog: &Catalog) -> Vec<IdentificationRow> {
        out.intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| {
                let name = match &iv.result.best {
                    Some(b) => catalog.entries[b.catalog_index].0.name.clone(),
                    None => iv.result.reason.map(|r| r.as_str()).unwrap_or(UNIDENTIFIED).to_string(),
                };
                IdentificationRow {
                    slot_start: iv.slot.start,
                    t_from: iv.t_from,
                    t_to: iv.t_to,
                    norad_id: iv.norad_id(),
                    satellite_name: name,
                    // unidentified rows still report the nearest candidate
                    score_deg: iv.result.ranked.first().map(|c| c.mean_separation_deg),
                    n_samples: iv.samples.len(),
                    switch_flag: out.switches.iter().any(|s| s.to_interval == i),
                }
            })
            .collect()
    }
}

fn opt_norad(id: Option<u32>) -> String {
    id.map(|n| n.to_string()).unwrap_or_else(|| UNIDENTIFIED.to_string())
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_identification<W: Write>(mut w: W, rows: &[IdentificationRow]) -> std::io::Result<()> {
    writeln!(w, "{}", IDENTIFICATION_COLUMNS.join(","))?;
    for r in rows {
        writeln!(
            w,
            "{:.3},{:.3},{:.3},{},{},{},{},{}",
            r.slot_start,
            r.t_from,
            r.t_to,
            opt_norad(r.norad_id),
            quote(&r.satellite_name),
            r.score_deg.map(|s| format!("{s:.4}")).unwrap_or_default(),
            r.n_samples,
            r.switch_flag
        )?;
    }
    Ok(())
}

pub fn write_switch_events<W: Write>(mut w: W, events: &[BeamSwitchEvent]) -> std::io::Result<()> {
    writeln!(w, "{}", SWITCH_COLUMNS.join(","))?;
    for e in events {
        writeln!(
            w,
            "{:.3},{:.3},{},{},{},{}",
            e.timestamp,
            e.slot_start,
            opt_norad(e.from_norad),
            opt_norad(e.to_norad),
            e.within_slot,
            e.corroborating_outage.as_ref().map(|o| o.start_ns.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

fn parse_norad(s: &str) -> Result<Option<u32>, String> {
    if s.is_empty() || s == UNIDENTIFIED {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("invalid NORAD id '{s}'"))
    }
}

pub fn read_identification<R: Read>(reader: R) -> Result<Parsed<IdentificationRow>, IngestError> {
    read_csv_log(reader, "identification", &IDENTIFICATION_COLUMNS, |row| {
        Ok(IdentificationRow {
            slot_start: row.f64("slot_start")?,
            t_from: row.f64("t_from")?,
            t_to: row.f64("t_to")?,
            norad_id: parse_norad(row.raw("norad_id"))?,
            satellite_name: row.raw("satellite_name").to_string(),
            score_deg: row.opt_f64("score_deg")?,
            n_samples: row.i64("n_samples")?.try_into().map_err(|_| "negative n_samples".to_string())?,
            switch_flag: row.bool("switch_flag")?,
        })
    })
}

pub fn read_switch_events<R: Read>(reader: R) -> Result<Parsed<SwitchRow>, IngestError> {
    read_csv_log(reader, "switch events", &SWITCH_COLUMNS, |row| {
        Ok(SwitchRow {
            timestamp: row.f64("timestamp")?,
            slot_start: row.f64("slot_start")?,
            from_norad: parse_norad(row.raw("from_norad"))?,
            to_norad: parse_norad(row.raw("to_norad"))?,
            within_slot: row.bool("within_slot")?,
            outage_start_ns: if row.raw("outage_start_ns").is_empty() {
                None
            } else {
                Some(row.i64("outage_start_ns")?)
            },
        })
    })
}
