//! Point clouds, voxel frames and the level-of-detail operations between them.

use crate::error::{Error, Result};
use crate::morton::{self, Coord, MAX_DEPTH};

/// 8-bit RGB color.
pub type Rgb = [u8; 3];

/// Axis-aligned cube enclosing a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: [f64; 3],
    pub edge: f64,
}

impl BBox {
    /// Tight box around `points`, expanded to a cube along its longest axis.
    ///
    /// Degenerate extents (no points, or all points equal) get edge 1.
    pub fn enclosing(points: &[[f64; 3]]) -> BBox {
        let Some(first) = points.first() else {
            return BBox { min: [0.0; 3], edge: 1.0 };
        };
        let mut lo = *first;
        let mut hi = *first;
        for p in points {
            for a in 0..3 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        Self::cube(lo, hi)
    }

    /// Smallest cube containing both boxes.
    pub fn union(&self, other: &BBox) -> BBox {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for a in 0..3 {
            lo[a] = self.min[a].min(other.min[a]);
            hi[a] = (self.min[a] + self.edge).max(other.min[a] + other.edge);
        }
        Self::cube(lo, hi)
    }

    fn cube(lo: [f64; 3], hi: [f64; 3]) -> BBox {
        let mut edge = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        // `lo + (hi - lo)` can round below `hi`
        for a in 0..3 {
            while edge > 0.0 && lo[a] + edge < hi[a] {
                edge = edge.next_up();
            }
        }
        BBox {
            min: lo,
            edge: if edge > 0.0 { edge } else { 1.0 },
        }
    }

    /// Closed containment test; points on the max faces are accepted and
    /// clamped into the last voxel at quantization time.
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.min[a] + self.edge)
    }
}

/// Unordered real-valued points with optional per-point colors.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    colors: Option<Vec<Rgb>>,
    bbox: BBox,
}

impl PointCloud {
    /// Builds a cloud whose bounding box is the cubified tight box of `points`.
    pub fn new(points: Vec<[f64; 3]>, colors: Option<Vec<Rgb>>) -> Result<Self> {
        let bbox = BBox::enclosing(&points);
        Self::with_bbox(points, colors, bbox)
    }

    pub fn with_bbox(points: Vec<[f64; 3]>, colors: Option<Vec<Rgb>>, bbox: BBox) -> Result<Self> {
        if let Some(c) = &colors {
            if c.len() != points.len() {
                return Err(Error::Parameter(format!(
                    "{} colors for {} points",
                    c.len(),
                    points.len()
                )));
            }
        }
        if !(bbox.edge > 0.0 && bbox.edge.is_finite()) || bbox.min.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("bounding box must be finite with edge > 0".into()));
        }
        if let Some(i) = points.iter().position(|p| !bbox.contains(p)) {
            return Err(Error::Parameter(format!("point {i} lies outside the bounding box")));
        }
        Ok(PointCloud { points, colors, bbox })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points and colors, re-anchored to a (larger) shared box.
    pub fn rebox(self, bbox: BBox) -> Result<Self> {
        Self::with_bbox(self.points, self.colors, bbox)
    }
}

/// The 8-bit occupancy pattern of a parent's children, bit `4·dx + 2·dy + dz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ChildMask(pub u8);

impl ChildMask {
    pub const FULL: ChildMask = ChildMask(0xff);

    pub fn is_set(self, child: u8) -> bool {
        self.0 >> child & 1 == 1
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    /// Set child indices in ascending (Morton) order.
    pub fn children(self) -> impl Iterator<Item = u8> {
        (0..8u8).filter(move |&c| self.is_set(c))
    }
}

pub(crate) fn check_depth(depth: u8) -> Result<()> {
    if (1..=MAX_DEPTH).contains(&depth) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("depth {depth} outside 1..={MAX_DEPTH}")))
    }
}

/// A voxelized frame: Morton-sorted occupied cells of a `2^J` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelFrame {
    depth: u8,
    codes: Vec<u64>,
    colors: Option<Vec<Rgb>>,
}

impl VoxelFrame {
    pub fn empty(depth: u8) -> Result<Self> {
        check_depth(depth)?;
        Ok(VoxelFrame { depth, codes: Vec::new(), colors: None })
    }

    /// Builds a frame from coordinates in any order. Duplicates are rejected.
    pub fn new(depth: u8, voxels: &[Coord], colors: Option<Vec<Rgb>>) -> Result<Self> {
        check_depth(depth)?;
        if let Some(c) = &colors {
            if c.len() != voxels.len() {
                return Err(Error::Parameter(format!(
                    "{} colors for {} voxels",
                    c.len(),
                    voxels.len()
                )));
            }
        }
        let side = 1u32 << depth;
        let mut keyed = Vec::with_capacity(voxels.len());
        for (i, v) in voxels.iter().enumerate() {
            if v.iter().any(|&c| c >= side) {
                return Err(Error::Parameter(format!("voxel {v:?} outside depth-{depth} grid")));
            }
            keyed.push((morton::encode(*v), i));
        }
        keyed.sort_unstable();
        if keyed.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parameter("duplicate voxel".into()));
        }
        let colors = colors.map(|c| keyed.iter().map(|&(_, i)| c[i]).collect());
        let codes = keyed.into_iter().map(|(code, _)| code).collect();
        Ok(VoxelFrame { depth, codes, colors })
    }

    /// Builds a frame from Morton codes that must already be strictly increasing.
    pub fn from_codes(depth: u8, codes: Vec<u64>, colors: Option<Vec<Rgb>>) -> Result<Self> {
        check_depth(depth)?;
        if codes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("codes not strictly increasing".into()));
        }
        if codes.last().is_some_and(|&c| c >> (3 * u32::from(depth)) != 0) {
            return Err(Error::Parameter(format!("code outside depth-{depth} grid")));
        }
        if colors.as_ref().is_some_and(|c| c.len() != codes.len()) {
            return Err(Error::Parameter("colors not aligned with voxels".into()));
        }
        Ok(VoxelFrame { depth, codes, colors })
    }

    // Caller guarantees every invariant.
    pub(crate) fn from_parts(depth: u8, codes: Vec<u64>, colors: Option<Vec<Rgb>>) -> Self {
        debug_assert!(codes.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(colors.as_ref().is_none_or(|c| c.len() == codes.len()));
        VoxelFrame { depth, codes, colors }
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    /// Grid side length `2^J`.
    pub fn side(&self) -> u32 {
        1 << self.depth
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn coords(&self) -> impl ExactSizeIterator<Item = Coord> + '_ {
        self.codes.iter().map(|&c| morton::decode(c))
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn has_colors(&self) -> bool {
        self.colors.is_some()
    }

    pub fn index_of(&self, c: Coord) -> Option<usize> {
        if c.iter().any(|&v| v >= self.side()) {
            return None;
        }
        self.codes.binary_search(&morton::encode(c)).ok()
    }

    pub fn contains(&self, c: Coord) -> bool {
        self.index_of(c).is_some()
    }

    /// Same geometry, colors dropped.
    pub fn geometry(&self) -> VoxelFrame {
        VoxelFrame { depth: self.depth, codes: self.codes.clone(), colors: None }
    }

    /// Same geometry, every voxel painted `color`.
    pub fn with_uniform_color(&self, color: Rgb) -> VoxelFrame {
        VoxelFrame {
            depth: self.depth,
            codes: self.codes.clone(),
            colors: Some(vec![color; self.codes.len()]),
        }
    }

    pub fn same_geometry(&self, other: &VoxelFrame) -> bool {
        self.depth == other.depth && self.codes == other.codes
    }
}

// Mean of non-negative integers, rounded half away from zero.
fn rounded_mean(sum: u64, n: u64) -> u8 {
    ((2 * sum + n) / (2 * n)) as u8
}

// Merges runs of equal keys (already sorted), averaging their colors.
fn merge_runs<I>(depth: u8, sorted: I, with_colors: bool) -> VoxelFrame
where
    I: IntoIterator<Item = (u64, Rgb)>,
{
    let mut codes: Vec<u64> = Vec::new();
    let mut colors = Vec::new();
    let mut acc = [0u64; 3];
    let mut n = 0u64;
    let flush = |colors: &mut Vec<Rgb>, acc: &[u64; 3], n: u64| {
        colors.push([
            rounded_mean(acc[0], n),
            rounded_mean(acc[1], n),
            rounded_mean(acc[2], n),
        ]);
    };
    for (code, rgb) in sorted {
        if codes.last() != Some(&code) {
            if n > 0 && with_colors {
                flush(&mut colors, &acc, n);
            }
            codes.push(code);
            acc = [0; 3];
            n = 0;
        }
        for a in 0..3 {
            acc[a] += u64::from(rgb[a]);
        }
        n += 1;
    }
    if n > 0 && with_colors {
        flush(&mut colors, &acc, n);
    }
    VoxelFrame::from_parts(depth, codes, with_colors.then_some(colors))
}

/// Quantizes a cloud onto the `2^J` grid spanning its bounding box.
///
/// Points sharing a voxel are merged; their colors are averaged per channel.
pub fn voxelize(cloud: &PointCloud, depth: u8) -> Result<VoxelFrame> {
    check_depth(depth)?;
    let bbox = cloud.bbox();
    let side = f64::from(1u32 << depth);
    let last = (1i64 << depth) - 1;
    let mut keyed: Vec<(u64, Rgb)> = cloud
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut c = [0u32; 3];
            for a in 0..3 {
                let q = ((p[a] - bbox.min[a]) / bbox.edge * side).floor() as i64;
                c[a] = q.clamp(0, last) as u32;
            }
            let rgb = cloud.colors().map_or([0; 3], |cs| cs[i]);
            (morton::encode(c), rgb)
        })
        .collect();
    keyed.sort_unstable_by_key(|&(code, _)| code);
    Ok(merge_runs(depth, keyed, cloud.colors().is_some()))
}

/// One level coarser: every voxel collapses onto its parent.
///
/// Parent colors are the per-channel mean over occupied children.
pub fn downsample(frame: &VoxelFrame) -> Result<VoxelFrame> {
    if frame.depth <= 1 {
        return Err(Error::DepthUnderflow);
    }
    let colors = frame.colors();
    let keyed = frame
        .codes
        .iter()
        .enumerate()
        .map(|(i, &code)| (code >> 3, colors.map_or([0; 3], |c| c[i])));
    Ok(merge_runs(frame.depth - 1, keyed, colors.is_some()))
}

/// Occupancy of the 8 children of `parent` (a depth `J−1` coordinate) in `frame`.
pub fn child_mask_of(frame: &VoxelFrame, parent: Coord) -> ChildMask {
    let half = frame.side() >> 1;
    if parent.iter().any(|&v| v >= half) {
        return ChildMask(0);
    }
    child_mask_by_code(frame.codes(), morton::encode(parent))
}

pub(crate) fn child_mask_by_code(codes: &[u64], parent: u64) -> ChildMask {
    let first = parent << 3;
    let start = codes.partition_point(|&c| c < first);
    let mut mask = 0u8;
    for &c in codes[start..].iter().take_while(|&&c| c < first + 8) {
        mask |= 1 << (c & 7);
    }
    ChildMask(mask)
}

/// Low-pass baseline: every voxel is replaced by all 8 of its children.
pub fn naive_upsample(frame: &VoxelFrame) -> Result<VoxelFrame> {
    if frame.depth >= MAX_DEPTH {
        return Err(Error::Parameter(format!(
            "cannot upsample beyond depth {MAX_DEPTH}"
        )));
    }
    let codes = frame
        .codes
        .iter()
        .flat_map(|&p| (0..8).map(move |c| (p << 3) | c))
        .collect();
    let colors = frame
        .colors()
        .map(|cs| cs.iter().flat_map(|&rgb| std::iter::repeat_n(rgb, 8)).collect());
    Ok(VoxelFrame::from_parts(frame.depth + 1, codes, colors))
}
