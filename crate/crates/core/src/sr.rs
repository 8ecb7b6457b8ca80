//! Example-based octree super-resolution.
//!
//! Every occupied voxel of a low-resolution frame is matched against the
//! occupied voxels of downsampled full-resolution reference frames by
//! comparing 3×3×3 occupancy neighborhoods. The child mask of the winning
//! reference voxel is copied onto the target voxel.
//!
//! Candidates are ranked by the strict total order
//! `(hamming cost, squared distance, candidate Morton code, reference index)`,
//! so the output does not depend on evaluation order or thread schedule.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{child_mask_by_code, downsample, ChildMask, VoxelFrame};
use crate::morton::{self, Coord};

/// Neighbor offsets in descriptor bit order: lexicographic, `dx` outermost.
pub const NEIGHBOR_OFFSETS: [[i32; 3]; 26] = {
    let mut out = [[0i32; 3]; 26];
    let mut i = 0;
    let mut n = 0;
    while n < 27 {
        let o = [n / 9 - 1, n / 3 % 3 - 1, n % 3 - 1];
        if !(o[0] == 0 && o[1] == 0 && o[2] == 0) {
            out[i] = o;
            i += 1;
        }
        n += 1;
    }
    out
};

/// 26-bit occupancy pattern of a voxel's neighbors (center excluded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Descriptor26(u32);

impl Descriptor26 {
    pub const MASK: u32 = (1 << 26) - 1;

    pub fn new(bits: u32) -> Option<Self> {
        (bits & !Self::MASK == 0).then_some(Descriptor26(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

/// Search radius in low-resolution voxels (Chebyshev distance).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchParams {
    pub window: u32,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams { window: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchResult {
    pub candidate: Coord,
    pub cost: u32,
    pub tie_distance: u64,
}

/// Occupancy descriptor of `coord` in `frame`; out-of-grid neighbors count as empty.
pub fn neighborhood(frame: &VoxelFrame, coord: Coord) -> Descriptor26 {
    let side = i64::from(frame.side());
    let mut bits = 0u32;
    for (i, o) in NEIGHBOR_OFFSETS.iter().enumerate() {
        let n = [0, 1, 2].map(|a| i64::from(coord[a]) + i64::from(o[a]));
        if n.iter().all(|&v| (0..side).contains(&v)) && frame.contains(n.map(|v| v as u32)) {
            bits |= 1 << i;
        }
    }
    Descriptor26(bits)
}

/// Hamming distance between two descriptors.
#[inline]
pub fn match_cost(a: Descriptor26, b: Descriptor26) -> u32 {
    (a.0 ^ b.0).count_ones()
}

fn squared_distance(a: Coord, b: Coord) -> u64 {
    (0..3)
        .map(|i| {
            let d = i64::from(a[i]) - i64::from(b[i]);
            (d * d) as u64
        })
        .sum()
}

/// Ranking key; smaller is better.
type Rank = (u32, u64, u64);

/// Downsampled reference with descriptors and a per-column spatial index.
struct RefIndex {
    low: VoxelFrame,
    descriptors: Vec<Descriptor26>,
    // (x, y) → indices into `low`, sorted by z
    columns: HashMap<(u32, u32), Vec<(u32, usize)>>,
}

impl RefIndex {
    fn build(low: VoxelFrame) -> Self {
        let descriptors = low
            .coords()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&c| neighborhood(&low, c))
            .collect();
        let mut columns: HashMap<(u32, u32), Vec<(u32, usize)>> = HashMap::new();
        for (i, c) in low.coords().enumerate() {
            columns.entry((c[0], c[1])).or_default().push((c[2], i));
        }
        for col in columns.values_mut() {
            col.sort_unstable();
        }
        RefIndex { low, descriptors, columns }
    }

    /// Best candidate for `target` around `coord`, with its index in `low`.
    fn best(&self, coord: Coord, target: Descriptor26, window: u32) -> Option<(Rank, usize)> {
        // An exact hit at the same position cannot be beaten.
        if let Some(i) = self.low.index_of(coord) {
            if self.descriptors[i] == target {
                return Some(((0, 0, self.low.codes()[i]), i));
            }
        }
        let lo = |v: u32| v.saturating_sub(window);
        let hi = |v: u32| v.saturating_add(window);
        let mut best: Option<(Rank, usize)> = None;
        for x in lo(coord[0])..=hi(coord[0]).min(self.low.side() - 1) {
            for y in lo(coord[1])..=hi(coord[1]).min(self.low.side() - 1) {
                let Some(col) = self.columns.get(&(x, y)) else {
                    continue;
                };
                let start = col.partition_point(|&(z, _)| z < lo(coord[2]));
                for &(z, i) in col[start..].iter().take_while(|&&(z, _)| z <= hi(coord[2])) {
                    let rank = (
                        match_cost(target, self.descriptors[i]),
                        squared_distance(coord, [x, y, z]),
                        self.low.codes()[i],
                    );
                    if best.is_none_or(|(b, _)| rank < b) {
                        best = Some((rank, i));
                    }
                }
            }
        }
        best
    }
}

fn check_pair(target: &VoxelFrame, reference: &VoxelFrame) -> Result<()> {
    if target.depth() != reference.depth() {
        return Err(Error::Parameter(format!(
            "depth mismatch: target {} vs reference {}",
            target.depth(),
            reference.depth()
        )));
    }
    Ok(())
}

/// Best-matching occupied voxel of `ref_low` within the search window of `coord`.
///
/// Returns `None` when the window holds no occupied reference voxel.
pub fn find_best_match(
    target_low: &VoxelFrame,
    coord: Coord,
    ref_low: &VoxelFrame,
    params: MatchParams,
) -> Result<Option<MatchResult>> {
    check_pair(target_low, ref_low)?;
    let index = RefIndex::build(ref_low.clone());
    let target = neighborhood(target_low, coord);
    Ok(index.best(coord, target, params.window).map(|((cost, dist, code), _)| MatchResult {
        candidate: morton::decode(code),
        cost,
        tie_distance: dist,
    }))
}

/// Infers a depth-`J` frame from a depth-`J−1` frame and depth-`J` references.
///
/// Unmatched voxels fall back to all 8 children. Children inherit the color
/// of their low-resolution parent.
pub fn super_resolve(
    target_low: &VoxelFrame,
    refs_full: &[VoxelFrame],
    params: MatchParams,
) -> Result<VoxelFrame> {
    if refs_full.is_empty() {
        return Err(Error::Parameter("super-resolution needs at least one reference".into()));
    }
    let depth = target_low.depth() + 1;
    if let Some(r) = refs_full.iter().find(|r| r.depth() != depth) {
        return Err(Error::Parameter(format!(
            "reference depth {} does not match target depth {} + 1",
            r.depth(),
            target_low.depth()
        )));
    }
    let indices: Vec<RefIndex> = refs_full
        .par_iter()
        .map(|r| downsample(r).map(RefIndex::build))
        .collect::<Result<_>>()?;

    let masks: Vec<ChildMask> = target_low
        .codes()
        .par_iter()
        .map(|&code| {
            let coord = morton::decode(code);
            let target = neighborhood(target_low, coord);
            let mut best: Option<(Rank, usize, usize)> = None;
            for (r, index) in indices.iter().enumerate() {
                if let Some((rank, i)) = index.best(coord, target, params.window) {
                    // strict `<` keeps the earlier reference on a full tie
                    if best.is_none_or(|(b, _, _)| rank < b) {
                        best = Some((rank, r, i));
                    }
                }
            }
            match best {
                Some((_, r, i)) => {
                    child_mask_by_code(refs_full[r].codes(), indices[r].low.codes()[i])
                }
                None => ChildMask::FULL,
            }
        })
        .collect();

    let total = masks.iter().map(|m| m.count() as usize).sum();
    let mut codes = Vec::with_capacity(total);
    let mut colors = target_low.colors().map(|_| Vec::with_capacity(total));
    for (i, (&parent, mask)) in target_low.codes().iter().zip(&masks).enumerate() {
        for c in mask.children() {
            codes.push((parent << 3) | u64::from(c));
            if let (Some(out), Some(src)) = (colors.as_mut(), target_low.colors()) {
                out.push(src[i]);
            }
        }
    }
    Ok(VoxelFrame::from_parts(depth, codes, colors))
}
