//! Scoring catalog satellites against observed trajectory samples.

use super::interp::{AttitudeTrack, LocationTrack};
use crate::geometry::{visible_catalog, Catalog, FovModel, Topocentric};

/// Default acceptance threshold on the mean angular separation, degrees.
pub const DEFAULT_TAU_MATCH_DEG: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UnidentifiedReason {
    NoSamples,
    NoTelemetry,
    NoCandidates,
    AboveThreshold,
}

impl UnidentifiedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UnidentifiedReason::NoSamples => "NO_SAMPLES",
            UnidentifiedReason::NoTelemetry => "NO_TELEMETRY",
            UnidentifiedReason::NoCandidates => "NO_CANDIDATES",
            UnidentifiedReason::AboveThreshold => "ABOVE_THRESHOLD",
        }
    }
}

/// Score of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub catalog_index: usize,
    pub norad_id: u32,
    pub mean_separation_deg: f64,
    pub mean_elevation_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Winner when accepted.
    pub best: Option<CandidateScore>,
    pub reason: Option<UnidentifiedReason>,
    /// All scored candidates, best first.
    pub ranked: Vec<CandidateScore>,
}

impl MatchResult {
    fn unidentified(reason: UnidentifiedReason, ranked: Vec<CandidateScore>) -> Self {
        MatchResult { best: None, reason: Some(reason), ranked }
    }

    pub fn norad_id(&self) -> Option<u32> {
        self.best.as_ref().map(|c| c.norad_id)
    }
}

/// Thresholds used by the matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchConfig {
    pub fov: FovModel,
    pub tau_match_deg: f64,
    pub elevation_mask_deg: f64,
}

/// Picks the catalog satellite whose predicted directions best follow the
/// observed samples.
///
/// Candidates are the visible satellites at the observation's mid-time. The
/// score is the mean great-circle separation between each sample and the
/// candidate at the sample time; equal scores prefer the higher satellite.
pub fn match_segment(
    samples: &[(f64, Topocentric)],
    locations: &LocationTrack,
    attitudes: &AttitudeTrack,
    catalog: &Catalog,
    cfg: &MatchConfig,
) -> MatchResult {
    if samples.is_empty() {
        return MatchResult::unidentified(UnidentifiedReason::NoSamples, Vec::new());
    }
    let mid = (samples[0].0 + samples[samples.len() - 1].0) / 2.0;
    // fall back to the sample times when the exact mid-time is in a telemetry gap
    let context = std::iter::once(mid)
        .chain(samples.iter().map(|s| s.0))
        .find_map(|t| Some((t, locations.at(t)?, attitudes.at(t)?)));
    let Some((t_ctx, observer, attitude)) = context else {
        return MatchResult::unidentified(UnidentifiedReason::NoTelemetry, Vec::new());
    };
    let candidates = visible_catalog(t_ctx, &observer, &attitude, &cfg.fov, catalog, cfg.elevation_mask_deg);
    if candidates.is_empty() {
        return MatchResult::unidentified(UnidentifiedReason::NoCandidates, Vec::new());
    }

    let observers: Vec<_> = samples.iter().map(|(t, _)| locations.at(*t).unwrap_or(observer)).collect();
    let mut ranked: Vec<CandidateScore> = candidates
        .iter()
        .filter_map(|c| {
            let mut sep = 0.0;
            let mut elev = 0.0;
            for ((t, dir), obs) in samples.iter().zip(&observers) {
                let pred = catalog.look(c.index, *t, obs)?;
                sep += dir.separation_deg(&pred);
                elev += pred.elevation_deg;
            }
            let n = samples.len() as f64;
            Some(CandidateScore {
                catalog_index: c.index,
                norad_id: c.norad_id,
                mean_separation_deg: sep / n,
                mean_elevation_deg: elev / n,
            })
        })
        .collect();
    ranked.sort_by(|a, b| {
        a.mean_separation_deg
            .total_cmp(&b.mean_separation_deg)
            .then(b.mean_elevation_deg.total_cmp(&a.mean_elevation_deg))
            .then(a.norad_id.cmp(&b.norad_id))
    });
    match ranked.first() {
        None => MatchResult::unidentified(UnidentifiedReason::NoCandidates, ranked),
        Some(best) if best.mean_separation_deg <= cfg.tau_match_deg => {
            MatchResult { best: Some(best.clone()), reason: None, ranked }
        }
        Some(_) => MatchResult::unidentified(UnidentifiedReason::AboveThreshold, ranked),
    }
}
