//! Obstruction-map image processing: binarization, frame conversion,
//! differencing, connected components and segment tracking.

mod ccl;
mod convert;
mod track;

use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::geometry::Pixel;
use crate::ingest::{FrameType, ObstructionFrame, CELL_COUNT, GRID_SIZE};

pub use ccl::{label_mask, label_segments, midpoint_of, Segment};
pub use convert::{ut_mask_to_earth, ut_to_earth_frame, ConversionStats};
pub use track::{track_segments, Correspondence, Track, TrackUpdate, Tracker, DEFAULT_GATE_PX, DEFAULT_RECENT_S};

/// Default signal-quality threshold at or below which a cell is obstructed.
pub const DEFAULT_OBSTRUCTION_THRESHOLD: f32 = 0.5;
/// A drop of more than this many explored pixels between frames is a map reset.
pub const RESET_DROP_PX: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("frames out of order: t_prev {t_prev} >= t_curr {t_curr}")]
    OutOfOrder { t_prev: f64, t_curr: f64 },
    #[error("cannot difference a {a:?} frame against a {b:?} frame")]
    FrameTypeMismatch { a: FrameType, b: FrameType },
    #[error("expected a FRAME_UT frame")]
    NotUtFrame,
}

/// Boolean image over the 123x123 grid.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    bits: Vec<bool>,
}

impl std::fmt::Debug for Mask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Mask({} set)", self.count())
    }
}

impl Default for Mask {
    fn default() -> Self {
        Mask::empty()
    }
}

impl Mask {
    pub fn empty() -> Self {
        Mask { bits: vec![false; CELL_COUNT] }
    }

    pub fn from_pixels<'a>(pixels: impl IntoIterator<Item = &'a Pixel>) -> Self {
        let mut m = Mask::empty();
        for p in pixels {
            m.set(p, true);
        }
        m
    }

    pub fn get(&self, p: &Pixel) -> bool {
        self.bits[p.index()]
    }

    pub fn get_rc(&self, row: usize, col: usize) -> bool {
        self.bits[row * GRID_SIZE + col]
    }

    pub fn set(&mut self, p: &Pixel, v: bool) {
        self.bits[p.index()] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Set pixels in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| Pixel::from_index(i))
    }

    pub fn xor(&self, other: &Mask) -> Mask {
        Mask { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect() }
    }

    pub fn and(&self, other: &Mask) -> Mask {
        Mask { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect() }
    }

    pub fn or(&self, other: &Mask) -> Mask {
        Mask { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect() }
    }

    pub fn and_not(&self, other: &Mask) -> Mask {
        Mask { bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect() }
    }

    /// Writes the mask as a binary PGM (set pixels white).
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{GRID_SIZE} {GRID_SIZE}\n255\n")?;
        let bytes: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        w.write_all(&bytes)
    }
}

/// Binarized frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFrame {
    pub timestamp: f64,
    pub frame_type: FrameType,
    /// Cells with any trajectory data.
    pub explored: Mask,
    /// Explored cells at or below the obstruction threshold.
    pub obstructed: Mask,
}

impl BinaryFrame {
    /// Share of explored cells that are obstructed (0 when nothing is explored).
    pub fn obstruction_ratio(&self) -> f64 {
        let e = self.explored.count();
        if e == 0 {
            0.0
        } else {
            self.obstructed.count() as f64 / e as f64
        }
    }
}

pub fn classify(frame: &ObstructionFrame, tau_obs: f32) -> BinaryFrame {
    let mut explored = Mask::empty();
    let mut obstructed = Mask::empty();
    for (i, &v) in frame.cells.iter().enumerate() {
        if v >= 0.0 {
            explored.bits[i] = true;
            obstructed.bits[i] = v <= tau_obs;
        }
    }
    BinaryFrame { timestamp: frame.timestamp, frame_type: frame.frame_type, explored, obstructed }
}

/// Newly changed cells between two consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffFrame {
    pub t_prev: f64,
    pub t_curr: f64,
    pub frame_type: FrameType,
    pub changed: Mask,
}

impl DiffFrame {
    pub fn mid_time(&self) -> f64 {
        (self.t_prev + self.t_curr) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiffOutcome {
    Diff(DiffFrame),
    /// The explored set shrank by more than [`RESET_DROP_PX`]; no diff is produced.
    Reset {
        t_prev: f64,
        t_curr: f64,
        dropped: usize,
    },
}

pub fn xor_diff(prev: &BinaryFrame, curr: &BinaryFrame) -> Result<DiffOutcome, MapError> {
    if prev.timestamp >= curr.timestamp {
        return Err(MapError::OutOfOrder { t_prev: prev.timestamp, t_curr: curr.timestamp });
    }
    if prev.frame_type != curr.frame_type {
        return Err(MapError::FrameTypeMismatch { a: prev.frame_type, b: curr.frame_type });
    }
    let (np, nc) = (prev.explored.count(), curr.explored.count());
    if nc + RESET_DROP_PX < np {
        return Ok(DiffOutcome::Reset { t_prev: prev.timestamp, t_curr: curr.timestamp, dropped: np - nc });
    }
    Ok(DiffOutcome::Diff(DiffFrame {
        t_prev: prev.timestamp,
        t_curr: curr.timestamp,
        frame_type: curr.frame_type,
        changed: prev.explored.xor(&curr.explored),
    }))
}

/// Writes explored/obstructed PGM images for one frame into `dir`.
pub fn dump_frame_pgm(frame: &BinaryFrame, index: usize, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = format!("{index:06}_{}", frame.frame_type.as_str());
    let f = std::fs::File::create(dir.join(format!("{stem}_explored.pgm")))?;
    frame.explored.write_pgm(std::io::BufWriter::new(f))?;
    let f = std::fs::File::create(dir.join(format!("{stem}_obstructed.pgm")))?;
    frame.obstructed.write_pgm(std::io::BufWriter::new(f))
}
