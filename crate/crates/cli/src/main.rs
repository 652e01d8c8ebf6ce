//! `beamtrace` command-line tool.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or missing inputs: exit 2.
    Usage(String),
    /// Inputs were accepted but could not be processed: exit 1.
    Processing(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Processing(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Processing(m) => f.write_str(m),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "beamtrace", version, about = "Starlink satellite identification and beam-switch analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Identify serving satellites and beam switches.
    Identify(RunArgs),
    /// Check identified intervals against reconstructed trajectories.
    Validate(RunArgs),
    /// Align results with outage, ping and throughput traces.
    Correlate(RunArgs),
    /// Generate a synthetic corpus with ground truth.
    Synth(RunArgs),
    /// Run every stage and write a summary document.
    Report(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Directory for all outputs.
    #[arg(long, short = 'o')]
    output_dir: PathBuf,
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Corpus directory; fills any stream path not given explicitly.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    frames: Option<PathBuf>,
    #[arg(long)]
    status: Option<PathBuf>,
    #[arg(long)]
    location: Option<PathBuf>,
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    outages: Option<PathBuf>,
    #[arg(long)]
    ping: Option<PathBuf>,
    #[arg(long)]
    throughput: Option<PathBuf>,
    /// Identification records from an earlier run.
    #[arg(long)]
    identification: Option<PathBuf>,
    /// Switch-event records from an earlier run.
    #[arg(long)]
    switches: Option<PathBuf>,

    #[arg(long)]
    hardware_model: Option<String>,
    /// Full field-of-view cone angle, degrees.
    #[arg(long)]
    fov_deg: Option<f64>,
    /// Obstruction-map quality threshold.
    #[arg(long)]
    tau_obs: Option<f32>,
    /// Maximum mean angular separation for a match, degrees.
    #[arg(long)]
    tau_match_deg: Option<f64>,
    #[arg(long)]
    elevation_mask_deg: Option<f64>,

    /// Pixel diff above which an interval is flagged.
    #[arg(long)]
    flag_px: Option<f64>,
    /// Trajectory reconstruction step, seconds.
    #[arg(long)]
    cadence_s: Option<f64>,

    /// Nominal ping interval, ms.
    #[arg(long)]
    ping_interval_ms: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    slots: Option<usize>,
    /// stationary, turning or mixed
    #[arg(long)]
    motion: Option<String>,
    /// FRAME_UT or FRAME_EARTH
    #[arg(long)]
    frame_type: Option<String>,
    #[arg(long)]
    switch_density: Option<f64>,
    #[arg(long)]
    synth_hardware_model: Option<String>,
    /// Generate the fixed two-slot switch replay scenario.
    #[arg(long)]
    replay: bool,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        cfg.output_dir = self.output_dir;
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v.into(); })*
            };
        }
        set!(
            corpus => inputs.corpus,
            frames => inputs.frames,
            status => inputs.status,
            location => inputs.location,
            catalog => inputs.catalog,
            outages => inputs.outages,
            ping => inputs.ping,
            throughput => inputs.throughput,
            identification => inputs.identification,
            switches => inputs.switches,
            hardware_model => ident.hardware_model,
            fov_deg => ident.fov_deg,
            tau_obs => ident.tau_obs,
            tau_match_deg => ident.tau_match_deg,
            elevation_mask_deg => ident.elevation_mask_deg,
            flag_px => validate.flag_px,
            cadence_s => validate.cadence_s,
            ping_interval_ms => correlate.ping_interval_ms,
            seed => synth.seed,
            slots => synth.slots,
            motion => synth.motion,
            frame_type => synth.frame_type,
            switch_density => synth.switch_density,
            synth_hardware_model => synth.hardware_model,
        );
        if self.replay {
            cfg.synth.replay = true;
        }
        cfg.resolve_corpus();
        cfg.check()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Identify(a) => commands::cmd_identify(&a.resolve()?),
        Command::Validate(a) => commands::cmd_validate(&a.resolve()?),
        Command::Correlate(a) => commands::cmd_correlate(&a.resolve()?),
        Command::Synth(a) => commands::cmd_synth(&a.resolve()?),
        Command::Report(a) => commands::cmd_report(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors and 0 for --help
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
