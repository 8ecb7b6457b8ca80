//! Projection-based color PSNR and point-to-point (D1) geometry PSNR.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{Rgb, VoxelFrame};
use crate::morton::Coord;

/// Color assigned to every voxel of a colorless frame before projection.
pub const DEFAULT_GRAY: Rgb = [128, 128, 128];

const PEAK: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Looking from the face at coordinate 0 toward increasing coordinates.
    Neg,
    /// Looking from the face at coordinate `2^J − 1` toward decreasing coordinates.
    Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: Axis,
    pub direction: Direction,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face { axis: Axis::X, direction: Direction::Neg },
        Face { axis: Axis::X, direction: Direction::Pos },
        Face { axis: Axis::Y, direction: Direction::Neg },
        Face { axis: Axis::Y, direction: Direction::Pos },
        Face { axis: Axis::Z, direction: Direction::Neg },
        Face { axis: Axis::Z, direction: Direction::Pos },
    ];

    // (u axis, v axis, depth axis)
    fn axes(self) -> (usize, usize, usize) {
        match self.axis {
            Axis::X => (1, 2, 0),
            Axis::Y => (0, 2, 1),
            Axis::Z => (0, 1, 2),
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::X => 'X',
            Axis::Y => 'Y',
            Axis::Z => 'Z',
        };
        let dir = match self.direction {
            Direction::Neg => '-',
            Direction::Pos => '+',
        };
        write!(f, "{axis}{dir}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pixel {
    pub color: Rgb,
    pub depth: u32,
}

/// Orthographic depth-buffered render of a frame onto one cube face.
///
/// Stored sparsely: occupied pixels sorted by `v · size + u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceImage {
    pub face: Face,
    pub size: u32,
    pixels: Vec<(u64, Pixel)>,
}

impl FaceImage {
    pub fn get(&self, u: u32, v: u32) -> Option<Pixel> {
        if u >= self.size || v >= self.size {
            return None;
        }
        let key = u64::from(v) * u64::from(self.size) + u64::from(u);
        self.pixels
            .binary_search_by_key(&key, |&(k, _)| k)
            .ok()
            .map(|i| self.pixels[i].1)
    }

    pub fn occupied(&self) -> usize {
        self.pixels.len()
    }

    /// Occupied pixels as `(u, v, pixel)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, Pixel)> + '_ {
        let size = u64::from(self.size);
        self.pixels
            .iter()
            .map(move |&(k, p)| ((k % size) as u32, (k / size) as u32, p))
    }
}

/// Renders `frame` onto `face`; the nearest voxel along each ray wins.
pub fn project_face(frame: &VoxelFrame, face: Face) -> FaceImage {
    let size = frame.side();
    let (ua, va, da) = face.axes();
    let last = size - 1;
    let mut pixels: Vec<(u64, Pixel)> = frame
        .coords()
        .enumerate()
        .map(|(i, c)| {
            let depth = match face.direction {
                Direction::Neg => c[da],
                Direction::Pos => last - c[da],
            };
            let color = frame.colors().map_or(DEFAULT_GRAY, |cs| cs[i]);
            let key = u64::from(c[va]) * u64::from(size) + u64::from(c[ua]);
            (key, Pixel { color, depth })
        })
        .collect();
    pixels.sort_unstable_by_key(|&(k, p)| (k, p.depth));
    pixels.dedup_by_key(|&mut (k, _)| k);
    FaceImage { face, size, pixels }
}

/// PSNR in dB; `f64::INFINITY` stands for a zero-error comparison.
pub fn psnr_from_mse(mse: f64, peak_sq: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak_sq / mse).log10()
    }
}

/// Formats a dB value, writing infinities as `inf` / `-inf`.
pub fn format_db(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.4}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceStats {
    pub face: Face,
    /// Mean squared color error over both-occupied pixels and channels.
    pub mse: f64,
    pub psnr: f64,
    pub both: usize,
    pub either: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub faces: [FaceStats; 6],
    /// Mean over finite faces; infinite only when all six faces are.
    pub mean_psnr: f64,
    pub occupancy_agreement: f64,
}

impl MetricReport {
    pub fn per_face_psnr(&self) -> [(Face, f64); 6] {
        self.faces.map(|s| (s.face, s.psnr))
    }
}

/// Compares two rendered faces over their both-occupied pixels.
pub fn compare_faces(a: &FaceImage, b: &FaceImage) -> FaceStats {
    let (mut i, mut j) = (0, 0);
    let (mut both, mut either) = (0usize, 0usize);
    let mut sq = 0u64;
    while i < a.pixels.len() || j < b.pixels.len() {
        let ka = a.pixels.get(i).map(|p| p.0);
        let kb = b.pixels.get(j).map(|p| p.0);
        either += 1;
        match (ka, kb) {
            (Some(x), Some(y)) if x == y => {
                let (ca, cb) = (a.pixels[i].1.color, b.pixels[j].1.color);
                for ch in 0..3 {
                    let d = i64::from(ca[ch]) - i64::from(cb[ch]);
                    sq += (d * d) as u64;
                }
                both += 1;
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
    }
    let mse = if both == 0 { 0.0 } else { sq as f64 / (3 * both) as f64 };
    FaceStats { face: a.face, mse, psnr: psnr_from_mse(mse, PEAK * PEAK), both, either }
}

/// Projection PSNR of `b` against `a` over the six faces of the grid cube.
pub fn projection_psnr(a: &VoxelFrame, b: &VoxelFrame) -> Result<MetricReport> {
    if a.depth() != b.depth() {
        return Err(Error::Parameter(format!(
            "depth mismatch: {} vs {}",
            a.depth(),
            b.depth()
        )));
    }
    let stats: Vec<FaceStats> = Face::ALL
        .par_iter()
        .map(|&face| compare_faces(&project_face(a, face), &project_face(b, face)))
        .collect();
    let faces: [FaceStats; 6] = stats.try_into().expect("six faces");

    let finite: Vec<f64> = faces.iter().map(|s| s.psnr).filter(|p| p.is_finite()).collect();
    let mean_psnr = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let both: usize = faces.iter().map(|s| s.both).sum();
    let either: usize = faces.iter().map(|s| s.either).sum();
    let occupancy_agreement = if either == 0 { 1.0 } else { both as f64 / either as f64 };
    Ok(MetricReport { faces, mean_psnr, occupancy_agreement })
}

/// Minimal 3-d tree over integer points for exact nearest-neighbor distances.
struct KdTree {
    // points arranged so that each subtree is a contiguous slice split at its median
    points: Vec<Coord>,
}

impl KdTree {
    fn new(mut points: Vec<Coord>) -> Self {
        fn build(pts: &mut [Coord], axis: usize) {
            if pts.len() <= 1 {
                return;
            }
            let mid = pts.len() / 2;
            pts.select_nth_unstable_by_key(mid, |p| p[axis]);
            let (left, right) = pts.split_at_mut(mid);
            build(left, (axis + 1) % 3);
            build(&mut right[1..], (axis + 1) % 3);
        }
        build(&mut points, 0);
        KdTree { points }
    }

    fn nearest_sq(&self, q: Coord) -> u64 {
        fn search(pts: &[Coord], axis: usize, q: Coord, best: &mut u64) {
            if pts.is_empty() {
                return;
            }
            let mid = pts.len() / 2;
            let p = pts[mid];
            let d = dist_sq(p, q);
            if d < *best {
                *best = d;
            }
            let delta = i64::from(q[axis]) - i64::from(p[axis]);
            let (near, far) = if delta < 0 {
                (&pts[..mid], &pts[mid + 1..])
            } else {
                (&pts[mid + 1..], &pts[..mid])
            };
            search(near, (axis + 1) % 3, q, best);
            if ((delta * delta) as u64) < *best {
                search(far, (axis + 1) % 3, q, best);
            }
        }
        let mut best = u64::MAX;
        search(&self.points, 0, q, &mut best);
        best
    }
}

fn dist_sq(a: Coord, b: Coord) -> u64 {
    (0..3)
        .map(|i| {
            let d = i64::from(a[i]) - i64::from(b[i]);
            (d * d) as u64
        })
        .sum()
}

fn one_sided_mse(from: &VoxelFrame, to: &KdTree) -> f64 {
    let coords: Vec<Coord> = from.coords().collect();
    let total: u64 = coords.par_iter().map(|&c| to.nearest_sq(c)).sum();
    total as f64 / coords.len() as f64
}

/// Symmetric point-to-point geometry PSNR with peak `3·(2^J − 1)²`.
pub fn d1_psnr(a: &VoxelFrame, b: &VoxelFrame) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Parameter("D1 PSNR needs two non-empty frames".into()));
    }
    if a.depth() != b.depth() {
        return Err(Error::Parameter(format!(
            "depth mismatch: {} vs {}",
            a.depth(),
            b.depth()
        )));
    }
    let tree_a = KdTree::new(a.coords().collect());
    let tree_b = KdTree::new(b.coords().collect());
    let mse = one_sided_mse(a, &tree_b).max(one_sided_mse(b, &tree_a));
    let peak = f64::from(a.side() - 1);
    Ok(psnr_from_mse(mse, 3.0 * peak * peak))
}
