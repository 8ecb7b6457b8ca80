//! `VOXF` voxel-frame container and `VOXT` octree-stream file.
//!
//! VOXF: `b"VOXF"`, u8 version (1), u8 depth, u8 flags (bit 0 = colors),
//! u64 count, then per voxel u32 x, u32 y, u32 z and, when flagged, u8 r, g, b.
//! VOXT: `b"VOXT"`, u8 version (1), u8 depth, u64 mask count, then the masks.
//! All integers little-endian; voxels in strictly increasing Morton order.

use crate::error::{CorruptKind, Error, Result};
use crate::frame::{ChildMask, VoxelFrame};
use crate::morton::{self, MAX_DEPTH};
use crate::octree::OctreeStream;

pub const VOXF_MAGIC: &[u8; 4] = b"VOXF";
pub const VOXT_MAGIC: &[u8; 4] = b"VOXT";
pub const VERSION: u8 = 1;

const FLAG_COLORS: u8 = 1;

pub fn write_voxf(frame: &VoxelFrame) -> Vec<u8> {
    let record = if frame.has_colors() { 15 } else { 12 };
    let mut out = Vec::with_capacity(15 + record * frame.len());
    out.extend_from_slice(VOXF_MAGIC);
    out.push(VERSION);
    out.push(frame.depth());
    out.push(if frame.has_colors() { FLAG_COLORS } else { 0 });
    out.extend_from_slice(&(frame.len() as u64).to_le_bytes());
    for (i, c) in frame.coords().enumerate() {
        for v in c {
            out.extend_from_slice(&v.to_le_bytes());
        }
        if let Some(colors) = frame.colors() {
            out.extend_from_slice(&colors[i]);
        }
    }
    out
}

// Byte cursor that reports truncation with the offset it happened at.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    format: &'static str,
}

impl<'a> Cursor<'a> {
    fn corrupt(&self, offset: usize, kind: CorruptKind) -> Error {
        Error::CorruptFile { format: self.format, offset: offset as u64, kind }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.corrupt(self.bytes.len(), CorruptKind::Truncated));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn preamble(&mut self, magic: &[u8; 4]) -> Result<u8> {
        if self.bytes.len() < 4 || &self.bytes[..4] != magic {
            return Err(self.corrupt(0, CorruptKind::BadMagic));
        }
        self.pos = 4;
        let version = self.u8()?;
        if version != VERSION {
            return Err(self.corrupt(4, CorruptKind::Version(version)));
        }
        let depth = self.u8()?;
        if !(1..=MAX_DEPTH).contains(&depth) {
            return Err(self.corrupt(5, CorruptKind::Depth(depth)));
        }
        Ok(depth)
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.corrupt(self.pos, CorruptKind::Trailing));
        }
        Ok(())
    }
}

pub fn read_voxf(bytes: &[u8]) -> Result<VoxelFrame> {
    let mut cur = Cursor { bytes, pos: 0, format: "VOXF" };
    let depth = cur.preamble(VOXF_MAGIC)?;
    let flags = cur.u8()?;
    if flags & !FLAG_COLORS != 0 {
        return Err(cur.corrupt(6, CorruptKind::Flags(flags)));
    }
    let colored = flags & FLAG_COLORS != 0;
    let count = cur.u64()?;
    let record = if colored { 15 } else { 12 };
    let remaining = (bytes.len() - cur.pos) as u64;
    if count.checked_mul(record).is_none_or(|need| need > remaining) {
        return Err(cur.corrupt(bytes.len(), CorruptKind::Truncated));
    }
    let count = count as usize;
    let side = 1u32 << depth;
    let mut codes: Vec<u64> = Vec::with_capacity(count);
    let mut colors = colored.then(|| Vec::with_capacity(count));
    for _ in 0..count {
        let at = cur.pos;
        let c = [cur.u32()?, cur.u32()?, cur.u32()?];
        if c.iter().any(|&v| v >= side) {
            return Err(cur.corrupt(at, CorruptKind::CoordinateRange));
        }
        let code = morton::encode(c);
        if codes.last().is_some_and(|&prev| prev >= code) {
            return Err(cur.corrupt(at, CorruptKind::Order));
        }
        codes.push(code);
        if let Some(out) = colors.as_mut() {
            let rgb = cur.take(3)?;
            out.push([rgb[0], rgb[1], rgb[2]]);
        }
    }
    cur.finish()?;
    Ok(VoxelFrame::from_parts(depth, codes, colors))
}

pub fn write_voxt(stream: &OctreeStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(14 + stream.masks.len());
    out.extend_from_slice(VOXT_MAGIC);
    out.push(VERSION);
    out.push(stream.depth);
    out.extend_from_slice(&(stream.masks.len() as u64).to_le_bytes());
    out.extend(stream.masks.iter().map(|m| m.0));
    out
}

/// Reads the container only; mask-count consistency is checked on decode.
pub fn read_voxt(bytes: &[u8]) -> Result<OctreeStream> {
    let mut cur = Cursor { bytes, pos: 0, format: "VOXT" };
    let depth = cur.preamble(VOXT_MAGIC)?;
    let count = cur.u64()?;
    if count > (bytes.len() - cur.pos) as u64 {
        return Err(cur.corrupt(bytes.len(), CorruptKind::Truncated));
    }
    let masks = cur.take(count as usize)?.iter().map(|&b| ChildMask(b)).collect();
    cur.finish()?;
    Ok(OctreeStream { depth, masks })
}
