//! Breadth-first octree occupancy streams.
//!
//! Level `ℓ` holds one [`ChildMask`] per occupied node at depth `ℓ−1`, in the
//! Morton order of those nodes. Level 1 is the single root mask. Decoding a
//! prefix of the levels yields the frame at that coarser resolution.

use crate::error::{Error, Result};
use crate::frame::{check_depth, ChildMask, VoxelFrame};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OctreeStream {
    pub depth: u8,
    pub masks: Vec<ChildMask>,
}

/// Geometry-only octree serialization of a non-empty frame.
pub fn encode(frame: &VoxelFrame) -> Result<OctreeStream> {
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let depth = frame.depth();
    let mut masks = Vec::new();
    for level in 1..=u32::from(depth) {
        let shift = 3 * (u32::from(depth) - level);
        let mut current: Option<(u64, u8)> = None;
        for &code in frame.codes() {
            let node = code >> shift;
            let (parent, child) = (node >> 3, (node & 7) as u8);
            match &mut current {
                Some((p, bits)) if *p == parent => *bits |= 1 << child,
                _ => {
                    if let Some((_, bits)) = current {
                        masks.push(ChildMask(bits));
                    }
                    current = Some((parent, 1 << child));
                }
            }
        }
        if let Some((_, bits)) = current {
            masks.push(ChildMask(bits));
        }
    }
    Ok(OctreeStream { depth, masks })
}

/// Decodes the full stream. Every mask must be consumed.
pub fn decode(stream: &OctreeStream) -> Result<VoxelFrame> {
    let (frame, used) = decode_prefix(stream, stream.depth)?;
    if used != stream.masks.len() {
        return Err(Error::CorruptStream {
            index: used,
            reason: format!("{} masks beyond the last level", stream.masks.len() - used),
        });
    }
    Ok(frame)
}

/// Decodes only the first `levels` levels, giving the frame at that depth.
pub fn decode_levels(stream: &OctreeStream, levels: u8) -> Result<VoxelFrame> {
    if levels == 0 || levels > stream.depth {
        return Err(Error::Parameter(format!(
            "cannot decode {levels} levels of a depth-{} stream",
            stream.depth
        )));
    }
    decode_prefix(stream, levels).map(|(f, _)| f)
}

fn decode_prefix(stream: &OctreeStream, levels: u8) -> Result<(VoxelFrame, usize)> {
    check_depth(stream.depth)?;
    let mut nodes: Vec<u64> = vec![0];
    let mut pos = 0usize;
    for level in 1..=levels {
        let end = pos + nodes.len();
        if end > stream.masks.len() {
            return Err(Error::CorruptStream {
                index: stream.masks.len(),
                reason: format!(
                    "level {level} needs {} masks, only {} remain",
                    nodes.len(),
                    stream.masks.len() - pos
                ),
            });
        }
        let mut next = Vec::with_capacity(nodes.len() * 4);
        for (i, &node) in nodes.iter().enumerate() {
            let mask = stream.masks[pos + i];
            if mask.0 == 0 {
                return Err(Error::CorruptStream {
                    index: pos + i,
                    reason: "empty mask for an occupied node".into(),
                });
            }
            next.extend(mask.children().map(|c| (node << 3) | u64::from(c)));
        }
        pos = end;
        nodes = next;
    }
    Ok((VoxelFrame::from_parts(levels, nodes, None), pos))
}
