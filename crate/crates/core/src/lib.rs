//! Identification of the Starlink satellites a dish was served by, from its
//! obstruction maps, attitude telemetry and public orbital elements, plus
//! beam-switch detection and correlation with network traces.

pub mod correlate;
pub mod geometry;
pub mod ident;
pub mod ingest;
pub mod mapproc;
pub mod orientation;
pub mod synth;
pub mod vector;
