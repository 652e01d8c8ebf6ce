//! Correlation of identification results with outage, ping and throughput
//! traces.

mod breakdown;
mod gaps;
mod output;
mod timeline;

pub use breakdown::{outage_breakdown, write_breakdown, CauseShare, OutageBreakdown};
pub use gaps::{detect_ping_gaps, GapDetector, PingGap, DEFAULT_PING_INTERVAL_MS};
pub use output::{
    series_points, write_outage_links, write_series, write_switch_annotations, write_timeline, SeriesPoint,
};
pub use timeline::{
    build_timeline, OutageLink, SlotRow, SwitchAnnotation, TimelineInputs, TimelineReport, SWITCH_WINDOW_S,
};
