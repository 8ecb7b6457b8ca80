//! Mixed-resolution voxelized point clouds and example-based super-resolution.
//!
//! Frames are Morton-sorted voxel sets on a `2^J` grid. A low-resolution frame
//! (depth `J−1`) regains its fine geometry by copying 8-child occupancy masks
//! from the best-matching neighborhoods of nearby full-resolution frames.

pub mod error;
pub mod frame;
pub mod gop;
pub mod io;
pub mod metrics;
pub mod morton;
pub mod octree;
pub mod sr;

pub use error::{CorruptKind, Error, Result};
pub use frame::{
    child_mask_of, downsample, naive_upsample, voxelize, BBox, ChildMask, PointCloud, Rgb,
    VoxelFrame,
};
pub use gop::{gop_simulate, GopPattern, GopRow, SequenceReport};
pub use metrics::{d1_psnr, project_face, projection_psnr, Face, FaceImage, MetricReport};
pub use morton::Coord;
pub use octree::OctreeStream;
pub use sr::{find_best_match, match_cost, neighborhood, super_resolve, Descriptor26, MatchParams, MatchResult};
