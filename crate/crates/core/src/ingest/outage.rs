use std::io::{Read, Write};
use std::path::Path;

use super::{open, read_csv_log, IngestError, Parsed, Row};

const SOURCE: &str = "outage log";
const COLUMNS: [&str; 4] = ["start_timestamp_ns", "duration_ns", "cause", "did_switch"];

/// Dish event reasons that can accompany an outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutageCause {
    Unknown,
    Booting,
    Stowed,
    ThermalShutdown,
    NoSchedule,
    NoSats,
    Obstructed,
    NoDownlink,
    NoPings,
    Sleeping,
    MovingWhileNotAllowed,
    SkySearch,
    HighDownlinkPacketLoss,
    RainSnrPersistentlyLow,
    EthNoLink,
    EthSlowLink,
    EthSlowLink100,
}

impl OutageCause {
    pub const ALL: [OutageCause; 17] = [
        OutageCause::Unknown,
        OutageCause::Booting,
        OutageCause::Stowed,
        OutageCause::ThermalShutdown,
        OutageCause::NoSchedule,
        OutageCause::NoSats,
        OutageCause::Obstructed,
        OutageCause::NoDownlink,
        OutageCause::NoPings,
        OutageCause::Sleeping,
        OutageCause::MovingWhileNotAllowed,
        OutageCause::SkySearch,
        OutageCause::HighDownlinkPacketLoss,
        OutageCause::RainSnrPersistentlyLow,
        OutageCause::EthNoLink,
        OutageCause::EthSlowLink,
        OutageCause::EthSlowLink100,
    ];

    /// Full protobuf enum name.
    pub fn full_name(&self) -> &'static str {
        match self {
            OutageCause::Unknown => "EVENT_REASON_OUTAGE_UNKNOWN",
            OutageCause::Booting => "EVENT_REASON_OUTAGE_BOOTING",
            OutageCause::Stowed => "EVENT_REASON_OUTAGE_STOWED",
            OutageCause::ThermalShutdown => "EVENT_REASON_OUTAGE_THERMAL_SHUTDOWN",
            OutageCause::NoSchedule => "EVENT_REASON_OUTAGE_NO_SCHEDULE",
            OutageCause::NoSats => "EVENT_REASON_OUTAGE_NO_SATS",
            OutageCause::Obstructed => "EVENT_REASON_OUTAGE_OBSTRUCTED",
            OutageCause::NoDownlink => "EVENT_REASON_OUTAGE_NO_DOWNLINK",
            OutageCause::NoPings => "EVENT_REASON_OUTAGE_NO_PINGS",
            OutageCause::Sleeping => "EVENT_REASON_OUTAGE_SLEEPING",
            OutageCause::MovingWhileNotAllowed => "EVENT_REASON_OUTAGE_MOVING_WHILE_NOT_ALLOWED",
            OutageCause::SkySearch => "EVENT_REASON_OUTAGE_SKY_SEARCH",
            OutageCause::HighDownlinkPacketLoss => "EVENT_REASON_HIGH_DOWNLINK_PACKET_LOSS",
            OutageCause::RainSnrPersistentlyLow => "EVENT_REASON_UT_ALERT_RAIN_SNR_PERSISTENTLY_LOW",
            OutageCause::EthNoLink => "EVENT_REASON_UT_ALERT_ETH_NO_LINK",
            OutageCause::EthSlowLink => "EVENT_REASON_UT_ALERT_ETH_SLOW_LINK",
            OutageCause::EthSlowLink100 => "EVENT_REASON_UT_ALERT_ETH_SLOW_LINK_100",
        }
    }

    /// Short label used in reports, e.g. `SKY_SEARCH`.
    pub fn label(&self) -> &'static str {
        let full = self.full_name();
        full.strip_prefix("EVENT_REASON_OUTAGE_").or_else(|| full.strip_prefix("EVENT_REASON_")).unwrap_or(full)
    }

    /// Matches the full name, the name without `EVENT_REASON_`, or the short label.
    pub fn parse(s: &str) -> Option<OutageCause> {
        let s = s.trim().to_ascii_uppercase();
        OutageCause::ALL.into_iter().find(|c| {
            let full = c.full_name();
            s == full || Some(s.as_str()) == full.strip_prefix("EVENT_REASON_") || s == c.label()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutageEvent {
    pub start_ns: i64,
    pub duration_ns: i64,
    pub cause: OutageCause,
    pub did_switch: bool,
}

impl OutageEvent {
    pub fn start_s(&self) -> f64 {
        self.start_ns as f64 / 1e9
    }

    pub fn end_s(&self) -> f64 {
        (self.start_ns + self.duration_ns) as f64 / 1e9
    }

    pub fn duration_s(&self) -> f64 {
        self.duration_ns as f64 / 1e9
    }
}

fn parse_row(row: &Row) -> Result<OutageEvent, String> {
    let duration_ns = row.i64("duration_ns")?;
    if duration_ns <= 0 {
        return Err(format!("non-positive duration {duration_ns}"));
    }
    let cause_raw = row.raw("cause");
    let cause = OutageCause::parse(cause_raw).unwrap_or_else(|| {
        log::warn!("{SOURCE}: unknown cause '{cause_raw}', recorded as OUTAGE_UNKNOWN");
        OutageCause::Unknown
    });
    Ok(OutageEvent {
        start_ns: row.i64("start_timestamp_ns")?,
        duration_ns,
        cause,
        did_switch: row.bool("did_switch")?,
    })
}

pub fn read_outage_log<R: Read>(reader: R) -> Result<Parsed<OutageEvent>, IngestError> {
    let mut parsed = read_csv_log(reader, SOURCE, &COLUMNS, parse_row)?;
    parsed.records.sort_by_key(|e| e.start_ns);
    Ok(parsed)
}

pub fn parse_outage_log(path: &Path) -> Result<Parsed<OutageEvent>, IngestError> {
    read_outage_log(open(path)?)
}

pub fn write_outage_log<W: Write>(mut w: W, events: &[OutageEvent]) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for e in events {
        writeln!(w, "{},{},{},{}", e.start_ns, e.duration_ns, e.cause.full_name(), e.did_switch)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(body: &str) -> Result<Parsed<OutageEvent>, IngestError> {
        read_outage_log(format!("{}\n{body}", COLUMNS.join(",")).as_bytes())
    }

    #[test]
    fn obstructed_event_end() {
        // 2025-06-01T00:12:39.380Z
        let p = parse("1748736759380000000,1280066127,EVENT_REASON_OUTAGE_OBSTRUCTED,false\n").unwrap();
        let e = &p.records[0];
        assert_eq!(e.cause, OutageCause::Obstructed);
        assert_eq!(e.start_ns + e.duration_ns, 1_748_736_760_660_066_127);
    }

    #[test]
    fn negative_duration_rejected() {
        let rows = "1,-5,OBSTRUCTED,false\n".to_string() + &"1,5,OBSTRUCTED,false\n".repeat(10);
        let p = parse(&rows).unwrap();
        assert_eq!(p.records.len(), 10);
        assert_eq!(p.rejected.len(), 1);
    }

    #[test]
    fn short_names_and_switch_flag() {
        let p = parse("1,5,SKY_SEARCH,true\n2,5,OUTAGE_NO_PINGS,false\n3,5,UT_ALERT_ETH_NO_LINK,0\n").unwrap();
        assert_eq!(p.records[0].cause, OutageCause::SkySearch);
        assert!(p.records[0].did_switch);
        assert_eq!(p.records[1].cause, OutageCause::NoPings);
        assert_eq!(p.records[2].cause, OutageCause::EthNoLink);
    }

    #[test]
    fn unknown_cause_maps_to_unknown() {
        let p = parse("1,5,SOLAR_FLARE,false\n").unwrap();
        assert_eq!(p.records[0].cause, OutageCause::Unknown);
    }

    #[test]
    fn seventeen_distinct_causes() {
        let names: std::collections::BTreeSet<_> = OutageCause::ALL.iter().map(|c| c.full_name()).collect();
        assert_eq!(names.len(), 17);
        for c in OutageCause::ALL {
            assert_eq!(OutageCause::parse(c.full_name()), Some(c));
            assert_eq!(OutageCause::parse(c.label()), Some(c));
        }
    }
}
