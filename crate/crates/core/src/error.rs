use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by voxel, octree, matching, metric and IO operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("cannot downsample a depth-1 frame")]
    DepthUnderflow,

    #[error("operation undefined on an empty frame")]
    EmptyFrame,

    #[error("corrupt octree stream at mask {index}: {reason}")]
    CorruptStream { index: usize, reason: String },

    #[error("PLY parse error at {location}: {reason}")]
    Ply { location: String, reason: String },

    #[error("corrupt {format} file at byte {offset}: {kind}")]
    CorruptFile {
        format: &'static str,
        offset: u64,
        kind: CorruptKind,
    },

    #[error("manifest has no frame entries")]
    EmptyManifest,

    #[error("frame {index} ({path}): {source}")]
    Frame {
        index: usize,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("sequence has no low-resolution frames")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What exactly is wrong with a binary container.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CorruptKind {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("depth {0} outside 1..=20")]
    Depth(u8),
    #[error("unknown flag bits {0:#04x}")]
    Flags(u8),
    #[error("coordinate out of range for depth")]
    CoordinateRange,
    #[error("voxels not in strictly increasing Morton order")]
    Order,
    #[error("truncated body")]
    Truncated,
    #[error("trailing bytes after body")]
    Trailing,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
