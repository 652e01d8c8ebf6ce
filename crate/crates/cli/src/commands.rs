//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use beamtrace::correlate::{
    build_timeline, outage_breakdown, series_points, write_breakdown, write_outage_links, write_series,
    write_switch_annotations, write_timeline, OutageBreakdown, TimelineInputs, TimelineReport,
};
use beamtrace::geometry::{Catalog, FovModel};
use beamtrace::ident::{
    identify, read_identification, read_switch_events, separation_stats, validate_assignments, write_identification,
    write_switch_events, IdentConfig, IdentificationRow, IdentifyOutput, IntervalValidation, LocationTrack,
    SeparationStats, SwitchRow, DEFAULT_MAX_GAP_S,
};
use beamtrace::ingest::{
    parse_location_log, parse_obstruction_frames, parse_outage_log, parse_ping_log, parse_status_log,
    parse_throughput_log, parse_tle_catalog, FrameType, IngestError, ObstructionFrame, OutageEvent, Parsed, PingSample,
    ThroughputSample, UtLocationRecord, UtStatusRecord,
};
use beamtrace::synth::{
    build_scenario, render, switch_replay_scenario, write_corpus, MotionKind, ScenarioOverrides, SynthConfig,
    SynthError,
};

use crate::config::RunConfig;
use crate::report::{write_report, ReportData};
use crate::CliError;

/// Reconstruction step when fewer than two frames give no spacing.
const FALLBACK_CADENCE_S: f64 = 0.5;

fn processing(e: impl std::fmt::Display) -> CliError {
    CliError::Processing(e.to_string())
}

fn require<'a>(path: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    path.as_deref().ok_or_else(|| CliError::Usage(format!("missing required input: --{name}")))
}

fn load<T>(
    name: &str,
    path: &Path,
    parse: impl Fn(&Path) -> Result<Parsed<T>, IngestError>,
) -> Result<Vec<T>, CliError> {
    let parsed = parse(path).map_err(processing)?;
    if !parsed.rejected.is_empty() {
        log::warn!("{name}: skipped {} malformed lines", parsed.rejected.len());
    }
    Ok(parsed.records)
}

fn load_opt<T>(
    name: &str,
    path: &Option<PathBuf>,
    parse: impl Fn(&Path) -> Result<Parsed<T>, IngestError>,
) -> Result<Vec<T>, CliError> {
    path.as_deref().map_or(Ok(Vec::new()), |p| load(name, p, parse))
}

fn output_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|e| processing(format!("cannot create {}: {e}", path.display())))
}

fn write_out(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let mut w = output_file(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| processing(format!("cannot write {name}: {e}")))
}

fn prepare_output(cfg: &RunConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| processing(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    cfg.write(&cfg.output_dir)
}

fn has_identify_inputs(cfg: &RunConfig) -> bool {
    let i = &cfg.inputs;
    i.frames.is_some() && i.status.is_some() && i.location.is_some() && i.catalog.is_some()
}

/// Median spacing of frame timestamps.
fn frame_cadence(frames: &[ObstructionFrame]) -> f64 {
    let mut d: Vec<f64> = frames.windows(2).map(|w| w[1].timestamp - w[0].timestamp).filter(|d| *d > 0.0).collect();
    if d.is_empty() {
        return FALLBACK_CADENCE_S;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

/// Outputs of the identification stage plus what later stages reuse.
pub struct IdentStage {
    pub locations: Vec<UtLocationRecord>,
    pub catalog: Catalog,
    pub config: IdentConfig,
    pub cadence_s: f64,
    pub output: IdentifyOutput,
    pub rows: Vec<IdentificationRow>,
    pub switches: Vec<SwitchRow>,
    pub outages: Vec<OutageEvent>,
}

fn ident_config(cfg: &RunConfig, status: &[UtStatusRecord]) -> Result<IdentConfig, CliError> {
    let p = &cfg.ident;
    let model = p
        .hardware_model
        .clone()
        .or_else(|| status.first().map(|s| s.hardware_model.clone()))
        .ok_or_else(|| CliError::Usage("no hardware model in the status log; pass --hardware-model".into()))?;
    let fov = match p.fov_deg {
        Some(f) => FovModel::new(&model, f),
        None => FovModel::for_hardware(&model),
    }
    .ok_or_else(|| CliError::Usage(format!("no field of view known for '{model}'; pass --fov-deg")))?;
    let mut ic = IdentConfig::new(fov);
    ic.tau_obs = p.tau_obs;
    ic.tau_match_deg = p.tau_match_deg;
    ic.elevation_mask_deg = p.elevation_mask_deg;
    Ok(ic)
}

pub fn run_identify(cfg: &RunConfig) -> Result<IdentStage, CliError> {
    let i = &cfg.inputs;
    let (fp, sp, lp, cp) = (
        require(&i.frames, "frames")?,
        require(&i.status, "status")?,
        require(&i.location, "location")?,
        require(&i.catalog, "catalog")?,
    );
    let frames = load("frames", fp, parse_obstruction_frames)?;
    let status = load("status", sp, parse_status_log)?;
    let locations = load("location", lp, parse_location_log)?;
    let tles = load("catalog", cp, parse_tle_catalog)?;
    let outages = load_opt("outages", &i.outages, parse_outage_log)?;
    let config = ident_config(cfg, &status)?;
    let catalog = Catalog::new(&tles);
    let output = identify(&frames, &status, &locations, &catalog, &outages, &config);
    let rows = IdentificationRow::from_output(&output, &catalog);
    let switches = output.switches.iter().map(SwitchRow::from_event).collect();
    let cadence_s = cfg.validate.cadence_s.unwrap_or_else(|| frame_cadence(&frames));
    Ok(IdentStage { locations, catalog, config, cadence_s, output, rows, switches, outages })
}

fn write_identify(dir: &Path, st: &IdentStage) -> Result<(), CliError> {
    write_out(dir, "identification.csv", |w| write_identification(w, &st.rows))?;
    write_out(dir, "switch_events.csv", |w| write_switch_events(w, &st.output.switches))
}

fn distinct_slots(rows: &[IdentificationRow]) -> usize {
    let mut s: Vec<f64> = rows.iter().map(|r| r.slot_start).collect();
    s.dedup();
    s.len()
}

pub fn cmd_identify(cfg: &RunConfig) -> Result<(), CliError> {
    let st = run_identify(cfg)?;
    prepare_output(cfg)?;
    write_identify(&cfg.output_dir, &st)?;
    println!(
        "slots processed: {}  intervals: {}  switches: {}  unidentified: {:.1}%",
        distinct_slots(&st.rows),
        st.rows.len(),
        st.switches.len(),
        st.output.unidentified_rate() * 100.0
    );
    Ok(())
}

/// Per-interval reconstruction check and the separation summary.
pub struct ValidateStage {
    pub rows: Vec<IdentificationRow>,
    pub validations: Vec<IntervalValidation>,
    pub separation: Option<SeparationStats>,
}

fn read_rows(path: &Path) -> Result<Vec<IdentificationRow>, CliError> {
    load("identification", path, |p| {
        read_identification(File::open(p).map_err(|source| IngestError::Io { path: p.to_path_buf(), source })?)
    })
}

fn read_switch_rows(path: &Path) -> Result<Vec<SwitchRow>, CliError> {
    load("switches", path, |p| {
        read_switch_events(File::open(p).map_err(|source| IngestError::Io { path: p.to_path_buf(), source })?)
    })
}

pub fn run_validate(cfg: &RunConfig, st: &IdentStage) -> Result<ValidateStage, CliError> {
    let rows = match &cfg.inputs.identification {
        Some(p) => {
            let rows = read_rows(p)?;
            let aligned = rows.len() == st.output.intervals.len()
                && rows.iter().zip(&st.output.intervals).all(|(r, iv)| (r.t_from - iv.t_from).abs() < 1e-3);
            if !aligned {
                return Err(processing(format!(
                    "{} does not describe the intervals found in these inputs ({} rows, {} intervals)",
                    p.display(),
                    rows.len(),
                    st.output.intervals.len()
                )));
            }
            rows
        }
        None => st.rows.clone(),
    };
    let ids: Vec<Option<u32>> = rows.iter().map(|r| r.norad_id).collect();
    let track = LocationTrack::new(&st.locations, DEFAULT_MAX_GAP_S);
    let validations =
        validate_assignments(&st.output, &ids, &st.catalog, &track, &st.config, st.cadence_s, cfg.validate.flag_px);
    let scores: Vec<f64> = rows.iter().filter(|r| r.norad_id.is_some()).filter_map(|r| r.score_deg).collect();
    Ok(ValidateStage { rows, validations, separation: separation_stats(&scores) })
}

fn opt(x: Option<f64>, prec: usize) -> String {
    x.map(|v| format!("{v:.prec$}")).unwrap_or_default()
}

pub fn mean_pixel_diff(v: &[IntervalValidation]) -> Option<f64> {
    let d: Vec<f64> = v.iter().filter_map(|v| v.pixel_diff).collect();
    (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64)
}

fn write_validate(dir: &Path, vs: &ValidateStage) -> Result<(), CliError> {
    write_out(dir, "validation.csv", |w| {
        writeln!(w, "interval,t_from,t_to,norad_id,pixel_diff,flagged")?;
        for v in &vs.validations {
            let r = &vs.rows[v.interval];
            writeln!(
                w,
                "{},{:.3},{:.3},{},{},{}",
                v.interval,
                r.t_from,
                r.t_to,
                v.norad_id,
                opt(v.pixel_diff, 3),
                v.flagged
            )?;
        }
        Ok(())
    })?;
    write_out(dir, "validation_summary.csv", |w| {
        let max = vs
            .validations
            .iter()
            .filter_map(|v| v.pixel_diff)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
        writeln!(w, "metric,value")?;
        writeln!(w, "intervals_checked,{}", vs.validations.len())?;
        writeln!(w, "flagged,{}", vs.validations.iter().filter(|v| v.flagged).count())?;
        writeln!(w, "mean_pixel_diff,{}", opt(mean_pixel_diff(&vs.validations), 4))?;
        writeln!(w, "max_pixel_diff,{}", opt(max, 4))?;
        writeln!(w, "separation_n,{}", vs.separation.map_or(0, |s| s.n))?;
        writeln!(w, "separation_mean_deg,{}", opt(vs.separation.map(|s| s.mean), 4))?;
        writeln!(w, "separation_std_deg,{}", opt(vs.separation.map(|s| s.std), 4))
    })
}

pub fn cmd_validate(cfg: &RunConfig) -> Result<(), CliError> {
    let st = run_identify(cfg)?;
    let vs = run_validate(cfg, &st)?;
    prepare_output(cfg)?;
    write_validate(&cfg.output_dir, &vs)?;
    println!(
        "intervals checked: {}  flagged: {}  mean pixel diff: {}",
        vs.validations.len(),
        vs.validations.iter().filter(|v| v.flagged).count(),
        opt(mean_pixel_diff(&vs.validations), 3)
    );
    Ok(())
}

/// Correlation tables and the plotting series.
pub struct CorrelateStage {
    pub breakdown: OutageBreakdown,
    pub timeline: TimelineReport,
    pub pings: Vec<PingSample>,
    pub throughput: Vec<ThroughputSample>,
}

pub fn run_correlate(
    cfg: &RunConfig,
    rows: &[IdentificationRow],
    switches: &[SwitchRow],
    outages: &[OutageEvent],
) -> Result<CorrelateStage, CliError> {
    let i = &cfg.inputs;
    let pings = load_opt("ping", &i.ping, parse_ping_log)?;
    let throughput = load_opt("throughput", &i.throughput, parse_throughput_log)?;
    let breakdown = outage_breakdown(outages);
    let timeline = build_timeline(&TimelineInputs {
        identification: rows,
        switches,
        outages,
        pings: &pings,
        throughput: &throughput,
        nominal_ping_interval_ms: cfg.correlate.ping_interval_ms,
    });
    for w in &timeline.warnings {
        eprintln!("warning: {w}");
    }
    Ok(CorrelateStage { breakdown, timeline, pings, throughput })
}

fn write_correlate(dir: &Path, cs: &CorrelateStage) -> Result<(), CliError> {
    write_out(dir, "outage_breakdown.csv", |w| write_breakdown(w, &cs.breakdown))?;
    write_out(dir, "timeline.csv", |w| write_timeline(w, &cs.timeline))?;
    write_out(dir, "switch_annotations.csv", |w| write_switch_annotations(w, &cs.timeline))?;
    write_out(dir, "outage_links.csv", |w| write_outage_links(w, &cs.timeline))?;
    let points = series_points(&cs.timeline, &cs.pings, &cs.throughput);
    write_out(dir, "series.csv", |w| write_series(w, &points))
}

pub fn cmd_correlate(cfg: &RunConfig) -> Result<(), CliError> {
    let i = &cfg.inputs;
    if [&i.identification, &i.switches, &i.outages, &i.ping, &i.throughput].iter().all(|p| p.is_none())
        && !has_identify_inputs(cfg)
    {
        return Err(CliError::Usage(
            "correlate needs at least one of --identification, --switches, --outages, --ping, --throughput".into(),
        ));
    }
    // earlier identification output wins over re-running the pipeline
    let (rows, switches, outages) = if i.identification.is_none() && has_identify_inputs(cfg) {
        let st = run_identify(cfg)?;
        (st.rows, st.switches, st.outages)
    } else {
        let rows = i.identification.as_deref().map_or(Ok(Vec::new()), read_rows)?;
        let switches = i.switches.as_deref().map_or(Ok(Vec::new()), read_switch_rows)?;
        (rows, switches, load_opt("outages", &i.outages, parse_outage_log)?)
    };
    let cs = run_correlate(cfg, &rows, &switches, &outages)?;
    prepare_output(cfg)?;
    write_correlate(&cfg.output_dir, &cs)?;
    println!("outage time: {:.3} s", cs.breakdown.total_seconds);
    for r in &cs.breakdown.rows {
        println!("  {:<28} {:>10.3} s {:>8.3}%", r.cause.label(), r.seconds, r.percent);
    }
    println!(
        "slots: {}  ping gaps: {}  switches annotated: {}",
        cs.timeline.slots.len(),
        cs.timeline.gaps.len(),
        cs.timeline.switches.len()
    );
    Ok(())
}

fn synth_config(cfg: &RunConfig) -> Result<SynthConfig, CliError> {
    let p = &cfg.synth;
    let motion = match p.motion.to_ascii_lowercase().as_str() {
        "stationary" => MotionKind::Stationary,
        "turning" => MotionKind::Turning,
        "mixed" => MotionKind::Mixed,
        m => return Err(CliError::Usage(format!("unknown motion '{m}' (stationary, turning, mixed)"))),
    };
    let frame_type = FrameType::parse(&p.frame_type)
        .ok_or_else(|| CliError::Usage(format!("unknown frame type '{}' (FRAME_UT, FRAME_EARTH)", p.frame_type)))?;
    Ok(SynthConfig {
        n_slots: p.slots,
        motion,
        frame_type,
        switch_density: p.switch_density,
        hardware_model: p.hardware_model.clone(),
        ..SynthConfig::default()
    })
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = cfg.synth.seed;
    let sc = if cfg.synth.replay {
        switch_replay_scenario(seed)
    } else {
        build_scenario(seed, &synth_config(cfg)?, &ScenarioOverrides::default())
    }
    .map_err(|e| match e {
        SynthError::InvalidConfig(m) => CliError::Usage(m),
        e => processing(e),
    })?;
    let rendered = render(&sc);
    prepare_output(cfg)?;
    write_corpus(&cfg.output_dir, &sc, &rendered).map_err(|e| processing(format!("cannot write corpus: {e}")))?;
    println!(
        "seed {seed}: {} slots from {:.3}, {} connections, {} scripted switches, {} frames",
        sc.slots().len(),
        sc.start,
        sc.schedule.len(),
        sc.scripted_switches().len(),
        rendered.frames.len()
    );
    Ok(())
}

pub fn cmd_report(cfg: &RunConfig) -> Result<(), CliError> {
    let dir = &cfg.output_dir;
    let (ident, validation) = if has_identify_inputs(cfg) {
        let st = run_identify(cfg)?;
        let vs = run_validate(cfg, &st)?;
        (Some(st), Some(vs))
    } else {
        (None, None)
    };
    let (rows, switches, outages) = match (&ident, &validation) {
        (Some(st), Some(vs)) => (vs.rows.clone(), st.switches.clone(), st.outages.clone()),
        _ => {
            let p = require(&cfg.inputs.identification, "identification")?;
            let rows = read_rows(p)?;
            let switches = cfg.inputs.switches.as_deref().map_or(Ok(Vec::new()), read_switch_rows)?;
            (rows, switches, load_opt("outages", &cfg.inputs.outages, parse_outage_log)?)
        }
    };
    let cs = run_correlate(cfg, &rows, &switches, &outages)?;

    prepare_output(cfg)?;
    if let Some(st) = &ident {
        write_identify(dir, st)?;
    }
    if let Some(vs) = &validation {
        write_validate(dir, vs)?;
    }
    write_correlate(dir, &cs)?;
    let data = ReportData {
        rows: &rows,
        switches: &switches,
        stats: ident.as_ref().map(|s| &s.output.stats),
        validation: validation.as_ref(),
        correlate: &cs,
    };
    write_out(dir, "report.md", |w| write_report(w, &data))?;
    println!("report written to {}", dir.join("report.md").display());
    Ok(())
}
