//! Mixed-resolution sequence simulation.
//!
//! Anchor frames `0, N, 2N, …` stay at full resolution. Every other frame is
//! downsampled one level, then reconstructed twice: by super-resolution from
//! its neighboring anchors and by naive upsampling. Both reconstructions are
//! scored against the original.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{downsample, naive_upsample, voxelize, BBox, VoxelFrame};
use crate::io::{is_voxf, load_ply, load_voxf_at, SequenceManifest};
use crate::metrics::{d1_psnr, format_db, projection_psnr};
use crate::sr::{super_resolve, MatchParams};

pub const CSV_HEADER: &str = "frame_index,ref_before,ref_after,sr_proj_psnr_db,base_proj_psnr_db,sr_d1_psnr_db,base_d1_psnr_db,gain_db";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GopPattern {
    period: usize,
}

impl GopPattern {
    pub fn new(period: usize) -> Result<Self> {
        if period < 2 {
            return Err(Error::Parameter(format!("GOP period must be >= 2, got {period}")));
        }
        Ok(GopPattern { period })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn is_anchor(&self, index: usize) -> bool {
        index.is_multiple_of(self.period)
    }

    /// Nearest anchors before and after `index` within a sequence of `len` frames.
    pub fn anchors(&self, index: usize, len: usize) -> (usize, Option<usize>) {
        let before = index / self.period * self.period;
        let after = before + self.period;
        (before, (after < len).then_some(after))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GopRow {
    pub frame_index: usize,
    pub ref_before: usize,
    pub ref_after: Option<usize>,
    pub sr_proj_psnr: f64,
    pub base_proj_psnr: f64,
    pub sr_d1_psnr: f64,
    pub base_d1_psnr: f64,
    pub gain: f64,
    /// Either projection PSNR is infinite; the row is left out of the mean gain.
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceReport {
    pub rows: Vec<GopRow>,
    /// Mean gain over non-excluded rows; NaN when every row is excluded.
    pub mean_gain: f64,
}

impl SequenceReport {
    pub fn from_rows(rows: Vec<GopRow>) -> Self {
        let kept: Vec<f64> = rows.iter().filter(|r| !r.excluded).map(|r| r.gain).collect();
        let mean_gain = if kept.is_empty() {
            f64::NAN
        } else {
            kept.iter().sum::<f64>() / kept.len() as f64
        };
        SequenceReport { rows, mean_gain }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.frame_index,
                r.ref_before,
                r.ref_after.map(|a| a.to_string()).unwrap_or_default(),
                format_db(r.sr_proj_psnr),
                format_db(r.base_proj_psnr),
                format_db(r.sr_d1_psnr),
                format_db(r.base_d1_psnr),
                format_db(r.gain),
            ));
        }
        out.push_str(&format!("summary,,,,,,,{}\n", format_db(self.mean_gain)));
        out
    }

    pub fn excluded_frames(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.excluded).map(|r| r.frame_index).collect()
    }
}

fn with_frame<T>(index: usize, path: &std::path::Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Frame { index, path: path.to_path_buf(), source: Box::new(e) })
}

/// Loads every manifest entry at `depth`.
///
/// PLY entries are voxelized on one shared cube: the union of the per-frame
/// boxes. VOXF entries are taken as-is (downsampled if deeper than `depth`).
pub fn load_sequence(manifest: &SequenceManifest, depth: u8) -> Result<Vec<VoxelFrame>> {
    enum Loaded {
        Cloud(crate::frame::PointCloud),
        Frame(VoxelFrame),
    }
    let loaded: Vec<Loaded> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let r = if is_voxf(path) {
                load_voxf_at(path, depth).map(Loaded::Frame)
            } else {
                load_ply(path).map(Loaded::Cloud)
            };
            with_frame(i, path, r)
        })
        .collect::<Result<_>>()?;

    let bbox = loaded
        .iter()
        .filter_map(|l| match l {
            Loaded::Cloud(c) if !c.is_empty() => Some(c.bbox()),
            _ => None,
        })
        .reduce(|a, b| a.union(&b))
        .unwrap_or(BBox { min: [0.0; 3], edge: 1.0 });

    loaded
        .into_par_iter()
        .enumerate()
        .map(|(i, l)| match l {
            Loaded::Frame(f) => Ok(f),
            Loaded::Cloud(c) => {
                let path = &manifest.entries[i];
                let c = with_frame(i, path, c.rebox(bbox))?;
                with_frame(i, path, voxelize(&c, depth))
            }
        })
        .collect()
}

/// Scores one low-resolution frame against its reconstructions.
pub fn evaluate_frame(
    frames: &[VoxelFrame],
    index: usize,
    pattern: GopPattern,
    params: MatchParams,
) -> Result<GopRow> {
    let original = &frames[index];
    let (before, after) = pattern.anchors(index, frames.len());
    let mut refs = vec![frames[before].clone()];
    if let Some(a) = after {
        refs.push(frames[a].clone());
    }
    let low = downsample(original)?;
    let sr = super_resolve(&low, &refs, params)?;
    let base = naive_upsample(&low)?;

    let sr_proj_psnr = projection_psnr(original, &sr)?.mean_psnr;
    let base_proj_psnr = projection_psnr(original, &base)?.mean_psnr;
    let (sr_d1_psnr, base_d1_psnr) = if original.is_empty() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (d1_psnr(original, &sr)?, d1_psnr(original, &base)?)
    };
    let excluded = !(sr_proj_psnr.is_finite() && base_proj_psnr.is_finite());
    let gain = if sr_proj_psnr == base_proj_psnr {
        0.0
    } else {
        sr_proj_psnr - base_proj_psnr
    };
    Ok(GopRow {
        frame_index: index,
        ref_before: before,
        ref_after: after,
        sr_proj_psnr,
        base_proj_psnr,
        sr_d1_psnr,
        base_d1_psnr,
        gain,
        excluded,
    })
}

/// Runs the mixed-resolution experiment over already-voxelized frames.
pub fn simulate_frames(
    frames: &[VoxelFrame],
    pattern: GopPattern,
    params: MatchParams,
) -> Result<SequenceReport> {
    let targets: Vec<usize> = (0..frames.len()).filter(|&i| !pattern.is_anchor(i)).collect();
    if targets.is_empty() {
        return Err(Error::EmptyReport);
    }
    let rows = targets
        .par_iter()
        .map(|&i| evaluate_frame(frames, i, pattern, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(SequenceReport::from_rows(rows))
}

pub fn gop_simulate(
    manifest: &SequenceManifest,
    depth: u8,
    pattern: GopPattern,
    params: MatchParams,
) -> Result<SequenceReport> {
    if depth < 2 {
        return Err(Error::Parameter("sequence depth must be >= 2".into()));
    }
    let frames = load_sequence(manifest, depth)?;
    simulate_frames(&frames, pattern, params)
}
