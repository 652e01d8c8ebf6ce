//! Run configuration: defaults, TOML file, command-line overrides.

use std::path::{Path, PathBuf};

use beamtrace::correlate::DEFAULT_PING_INTERVAL_MS;
use beamtrace::geometry::DEFAULT_ELEVATION_MASK_DEG;
use beamtrace::ident::{DEFAULT_PIXEL_DIFF_FLAG_PX, DEFAULT_TAU_MATCH_DEG};
use beamtrace::mapproc::DEFAULT_OBSTRUCTION_THRESHOLD;
use beamtrace::synth::CorpusFiles;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Directory laid out like a synthetic corpus; fills unset paths.
    pub corpus: Option<PathBuf>,
    pub frames: Option<PathBuf>,
    pub status: Option<PathBuf>,
    pub location: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub outages: Option<PathBuf>,
    pub ping: Option<PathBuf>,
    pub throughput: Option<PathBuf>,
    pub identification: Option<PathBuf>,
    pub switches: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentParams {
    /// Overrides the model reported in the status log.
    pub hardware_model: Option<String>,
    /// Full cone angle; required for models without a built-in value.
    pub fov_deg: Option<f64>,
    pub tau_obs: f32,
    pub tau_match_deg: f64,
    pub elevation_mask_deg: f64,
}

impl Default for IdentParams {
    fn default() -> Self {
        IdentParams {
            hardware_model: None,
            fov_deg: None,
            tau_obs: DEFAULT_OBSTRUCTION_THRESHOLD,
            tau_match_deg: DEFAULT_TAU_MATCH_DEG,
            elevation_mask_deg: DEFAULT_ELEVATION_MASK_DEG,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateParams {
    pub flag_px: f64,
    /// Reconstruction step; the median frame spacing when unset.
    pub cadence_s: Option<f64>,
}

impl Default for ValidateParams {
    fn default() -> Self {
        ValidateParams { flag_px: DEFAULT_PIXEL_DIFF_FLAG_PX, cadence_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelateParams {
    pub ping_interval_ms: f64,
}

impl Default for CorrelateParams {
    fn default() -> Self {
        CorrelateParams { ping_interval_ms: DEFAULT_PING_INTERVAL_MS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub seed: u64,
    pub slots: usize,
    /// stationary, turning or mixed
    pub motion: String,
    /// FRAME_UT or FRAME_EARTH
    pub frame_type: String,
    pub switch_density: f64,
    pub hardware_model: String,
    /// Build the fixed two-slot switch replay instead of a random scenario.
    pub replay: bool,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            seed: 1,
            slots: 4,
            motion: "mixed".into(),
            frame_type: "FRAME_UT".into(),
            switch_density: 0.5,
            hardware_model: "hp1_proto2".into(),
            replay: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub inputs: Inputs,
    pub ident: IdentParams,
    pub validate: ValidateParams,
    pub correlate: CorrelateParams,
    pub synth: SynthParams,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fills unset stream paths from the corpus directory, for files that exist.
    pub fn resolve_corpus(&mut self) {
        let Some(dir) = self.inputs.corpus.clone() else { return };
        let f = CorpusFiles::in_dir(&dir);
        let i = &mut self.inputs;
        for (slot, path) in [
            (&mut i.frames, f.frames),
            (&mut i.status, f.status),
            (&mut i.location, f.location),
            (&mut i.catalog, f.catalog),
            (&mut i.outages, f.outages),
            (&mut i.ping, f.ping),
            (&mut i.throughput, f.throughput),
        ] {
            if slot.is_none() && path.exists() {
                *slot = Some(path);
            }
        }
    }

    /// Range checks and existence of every referenced input.
    // negated comparisons so that NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        let p = &self.ident;
        if !(p.tau_obs > 0.0 && p.tau_obs < 1.0) {
            return bad(format!("tau_obs must be in (0, 1), got {}", p.tau_obs));
        }
        if !(p.tau_match_deg > 0.0) {
            return bad(format!("tau_match_deg must be positive, got {}", p.tau_match_deg));
        }
        if !(0.0..90.0).contains(&p.elevation_mask_deg) {
            return bad(format!("elevation_mask_deg must be in [0, 90), got {}", p.elevation_mask_deg));
        }
        if let Some(f) = p.fov_deg {
            if !(f > 0.0 && f < 180.0) {
                return bad(format!("fov_deg must be in (0, 180), got {f}"));
            }
        }
        if !(self.validate.flag_px > 0.0) {
            return bad(format!("flag_px must be positive, got {}", self.validate.flag_px));
        }
        if let Some(c) = self.validate.cadence_s {
            if !(c > 0.0) {
                return bad(format!("cadence_s must be positive, got {c}"));
            }
        }
        if !(self.correlate.ping_interval_ms > 0.0) {
            return bad(format!("ping_interval_ms must be positive, got {}", self.correlate.ping_interval_ms));
        }
        if !(0.0..=1.0).contains(&self.synth.switch_density) {
            return bad(format!("switch_density must be in [0, 1], got {}", self.synth.switch_density));
        }
        let i = &self.inputs;
        for (name, path) in [
            ("corpus", &i.corpus),
            ("frames", &i.frames),
            ("status", &i.status),
            ("location", &i.location),
            ("catalog", &i.catalog),
            ("outages", &i.outages),
            ("ping", &i.ping),
            ("throughput", &i.throughput),
            ("identification", &i.identification),
            ("switches", &i.switches),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return bad(format!("{name} input {} does not exist", p.display()));
                }
            }
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Processing(format!("cannot serialize config: {e}")))?;
        std::fs::write(dir.join("run_config.toml"), text)
            .map_err(|e| CliError::Processing(format!("cannot write run_config.toml: {e}")))
    }
}
