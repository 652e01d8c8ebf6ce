//! Command-line contract: exit codes, config precedence, written artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn beamtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beamtrace")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str) -> std::path::PathBuf {
    let corpus = dir.join("corpus");
    let out = beamtrace(&["synth", "-o", s(&corpus), "--seed", seed]);
    assert!(out.status.success());
    corpus
}

#[test]
fn missing_output_dir_is_usage_error() {
    assert_eq!(beamtrace(&["identify"]).status.code(), Some(2));
}

#[test]
fn missing_catalog_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "1");
    std::fs::remove_file(corpus.join("catalog.tle")).unwrap();
    let out = beamtrace(&["identify", "-o", s(&dir.path().join("o")), "--corpus", s(&corpus)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--catalog"));

    let out =
        beamtrace(&["identify", "-o", s(&dir.path().join("o")), "--corpus", s(&corpus), "--catalog", "/no/such.tle"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_is_processing_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "1");
    std::fs::write(corpus.join("status.csv"), "not,a,status\nlog,at,all\n").unwrap();
    let out = beamtrace(&["identify", "-o", s(&dir.path().join("o")), "--corpus", s(&corpus)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn empty_frame_file_gives_zero_slots() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "1");
    let empty = dir.path().join("frames.csv");
    std::fs::write(&empty, "").unwrap();
    let o = dir.path().join("o");
    let out = beamtrace(&["identify", "-o", s(&o), "--corpus", s(&corpus), "--frames", s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("slots processed: 0"));
    assert_eq!(std::fs::read_to_string(o.join("identification.csv")).unwrap().lines().count(), 1);

    // nothing identified: validation is empty but succeeds
    let v = dir.path().join("v");
    let out = beamtrace(&["validate", "-o", s(&v), "--corpus", s(&corpus), "--frames", s(&empty)]);
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(v.join("validation_summary.csv")).unwrap();
    assert!(summary.contains("intervals_checked,0"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "2");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[ident]\ntau_match_deg = 3.0\nelevation_mask_deg = 15.0\n").unwrap();
    let o = dir.path().join("o");
    let out =
        beamtrace(&["identify", "-o", s(&o), "--config", s(&cfg), "--corpus", s(&corpus), "--tau-match-deg", "2.5"]);
    assert!(out.status.success());
    let resolved = std::fs::read_to_string(o.join("run_config.toml")).unwrap();
    assert!(resolved.contains("tau_match_deg = 2.5"), "{resolved}");
    assert!(resolved.contains("elevation_mask_deg = 15.0"), "{resolved}");
    assert!(resolved.contains("tau_obs = 0.5"), "{resolved}");

    std::fs::write(&cfg, "[ident]\ntau_obs = 2.0\n").unwrap();
    let out = beamtrace(&["identify", "-o", s(&o), "--config", s(&cfg), "--corpus", s(&corpus)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_lists_slots_switches_and_outages() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "1");
    let o = dir.path().join("r");
    assert!(beamtrace(&["report", "-o", s(&o), "--corpus", s(&corpus)]).status.success());
    let md = std::fs::read_to_string(o.join("report.md")).unwrap();
    for section in
        ["## Identification", "### Slots", "### Beam switches", "## Validation", "## Outage breakdown", "## Timeline"]
    {
        assert!(md.contains(section), "missing {section}");
    }
    assert!(md.contains("OBSTRUCTED"));
    let series = std::fs::read_to_string(o.join("series.csv")).unwrap();
    assert!(series.starts_with("timestamp,metric,value,annotation\n"));
    assert!(series.contains(",beam_switch,"));
}

#[test]
fn report_from_earlier_identification() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), "1");
    let i = dir.path().join("i");
    assert!(beamtrace(&["identify", "-o", s(&i), "--corpus", s(&corpus)]).status.success());
    let o = dir.path().join("r");
    let out = beamtrace(&[
        "report",
        "-o",
        s(&o),
        "--identification",
        s(&i.join("identification.csv")),
        "--switches",
        s(&i.join("switch_events.csv")),
        "--outages",
        s(&corpus.join("outages.csv")),
        "--ping",
        s(&corpus.join("ping.csv")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let md = std::fs::read_to_string(o.join("report.md")).unwrap();
    assert!(!md.contains("## Validation"));
    assert!(md.contains("### Beam switches"));
}

#[test]
fn correlate_requires_some_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(beamtrace(&["correlate", "-o", s(dir.path())]).status.code(), Some(2));
}

#[test]
fn unknown_synth_motion_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(beamtrace(&["synth", "-o", s(dir.path()), "--motion", "flying"]).status.code(), Some(2));
}
