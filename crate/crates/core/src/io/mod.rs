//! File formats: PLY clouds, VOXF frames, VOXT octree streams, sequence manifests.

mod manifest;
mod ply;
mod voxf;

use std::path::Path;

pub use manifest::{read_manifest, SequenceManifest};
pub use ply::{read_ply, write_ply, PlyFormat};
pub use voxf::{read_voxf, read_voxt, write_voxf, write_voxt, VERSION, VOXF_MAGIC, VOXT_MAGIC};

use crate::error::{Error, Result};
use crate::frame::{downsample, PointCloud, VoxelFrame};

pub fn load_ply(path: &Path) -> Result<PointCloud> {
    read_ply(&std::fs::read(path)?)
}

pub fn load_voxf(path: &Path) -> Result<VoxelFrame> {
    read_voxf(&std::fs::read(path)?)
}

/// Reads a `.voxf` frame and brings it down to `depth`.
pub fn load_voxf_at(path: &Path, depth: u8) -> Result<VoxelFrame> {
    let mut frame = load_voxf(path)?;
    if frame.depth() < depth {
        return Err(Error::Parameter(format!(
            "frame depth {} is below the requested depth {depth}",
            frame.depth()
        )));
    }
    while frame.depth() > depth {
        frame = downsample(&frame)?;
    }
    Ok(frame)
}

pub fn is_voxf(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("voxf"))
}
