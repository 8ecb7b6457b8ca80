//! Morton (Z-order) codes for 3D integer grid coordinates.
//!
//! Bits are interleaved with `x` as the most significant bit of each triple,
//! so the low three bits of a code are exactly the child index
//! `4·dx + 2·dy + dz` of the voxel inside its parent, and `code >> 3` is the
//! parent's code one level up.

/// Maximum supported octree depth. Coordinates fit in 20 bits and codes in 60.
pub const MAX_DEPTH: u8 = 20;

/// Integer voxel coordinate `[x, y, z]`.
pub type Coord = [u32; 3];

// Spreads the low 21 bits of `v` so that two zero bits separate each one.
fn spread(v: u32) -> u64 {
    let mut w = u64::from(v) & 0x1f_ffff;
    w = (w | w << 32) & 0x001f_0000_0000_ffff;
    w = (w | w << 16) & 0x001f_0000_ff00_00ff;
    w = (w | w << 8) & 0x100f_00f0_0f00_f00f;
    w = (w | w << 4) & 0x10c3_0c30_c30c_30c3;
    w = (w | w << 2) & 0x1249_2492_4924_9249;
    w
}

fn compact(code: u64) -> u32 {
    let mut w = code & 0x1249_2492_4924_9249;
    w = (w ^ (w >> 2)) & 0x10c3_0c30_c30c_30c3;
    w = (w ^ (w >> 4)) & 0x100f_00f0_0f00_f00f;
    w = (w ^ (w >> 8)) & 0x001f_0000_ff00_00ff;
    w = (w ^ (w >> 16)) & 0x001f_0000_0000_ffff;
    w = (w ^ (w >> 32)) & 0x1f_ffff;
    w as u32
}

#[inline]
pub fn encode(c: Coord) -> u64 {
    (spread(c[0]) << 2) | (spread(c[1]) << 1) | spread(c[2])
}

#[inline]
pub fn decode(code: u64) -> Coord {
    [compact(code >> 2), compact(code >> 1), compact(code)]
}

/// Child index of offset `(dx, dy, dz) ∈ {0,1}³` inside a parent.
#[inline]
pub fn child_index(dx: u32, dy: u32, dz: u32) -> u8 {
    ((dx << 2) | (dy << 1) | dz) as u8
}
