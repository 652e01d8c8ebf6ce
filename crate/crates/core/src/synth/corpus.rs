//! Writing a rendered scenario as an on-disk corpus.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{RenderedCorpus, SyntheticScenario};
use crate::ident::timeslot_of;
use crate::ingest::{
    read_csv_log, write_location_log, write_obstruction_frames, write_outage_log, write_ping_log, write_status_log,
    write_throughput_log, write_tle_catalog, IngestError, Parsed,
};

/// File layout of a corpus directory.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFiles {
    pub frames: PathBuf,
    pub status: PathBuf,
    pub location: PathBuf,
    pub catalog: PathBuf,
    pub outages: PathBuf,
    pub ping: PathBuf,
    pub throughput: PathBuf,
    pub ground_truth: PathBuf,
}

impl CorpusFiles {
    pub fn in_dir(dir: &Path) -> Self {
        CorpusFiles {
            frames: dir.join("obstruction_frames.csv"),
            status: dir.join("status.csv"),
            location: dir.join("location.csv"),
            catalog: dir.join("catalog.tle"),
            outages: dir.join("outages.csv"),
            ping: dir.join("ping.csv"),
            throughput: dir.join("throughput.csv"),
            ground_truth: dir.join("ground_truth.csv"),
        }
    }
}

/// One scheduled connection; `switch_flag` marks a mid-slot entry.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRow {
    pub slot_start: f64,
    pub t_from: f64,
    pub t_to: f64,
    pub norad_id: u32,
    pub switch_flag: bool,
}

const GROUND_TRUTH_COLUMNS: [&str; 5] = ["slot_start", "t_from", "t_to", "norad_id", "switch_flag"];

pub fn write_ground_truth<W: Write>(mut w: W, sc: &SyntheticScenario) -> std::io::Result<()> {
    writeln!(w, "{}", GROUND_TRUTH_COLUMNS.join(","))?;
    for c in &sc.schedule {
        let slot = timeslot_of(c.t_from);
        writeln!(w, "{:.3},{:.3},{:.3},{},{}", slot.start, c.t_from, c.t_to, c.norad_id, c.t_from != slot.start)?;
    }
    Ok(())
}

pub fn read_ground_truth<R: Read>(reader: R) -> Result<Parsed<GroundTruthRow>, IngestError> {
    read_csv_log(reader, "ground truth", &GROUND_TRUTH_COLUMNS, |row| {
        Ok(GroundTruthRow {
            slot_start: row.f64("slot_start")?,
            t_from: row.f64("t_from")?,
            t_to: row.f64("t_to")?,
            norad_id: row.i64("norad_id")?.try_into().map_err(|_| "NORAD id out of range".to_string())?,
            switch_flag: row.bool("switch_flag")?,
        })
    })
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes every stream of the corpus into `dir` in the ingest formats.
pub fn write_corpus(dir: &Path, sc: &SyntheticScenario, r: &RenderedCorpus) -> std::io::Result<CorpusFiles> {
    std::fs::create_dir_all(dir)?;
    let files = CorpusFiles::in_dir(dir);
    write_obstruction_frames(create(&files.frames)?, &r.frames)?;
    write_status_log(create(&files.status)?, &r.status)?;
    write_location_log(create(&files.location)?, &r.locations)?;
    write_tle_catalog(create(&files.catalog)?, &sc.catalog)?;
    write_outage_log(create(&files.outages)?, &r.outages)?;
    write_ping_log(create(&files.ping)?, &r.pings)?;
    write_throughput_log(create(&files.throughput)?, &r.throughput)?;
    write_ground_truth(create(&files.ground_truth)?, sc)?;
    Ok(files)
}
