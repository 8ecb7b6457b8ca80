//! Brute-force oracles shared by integration and acceptance tests.
//!
//! Everything here works on plain coordinate sets and loops; none of it goes
//! through Morton-sorted storage, spatial indices or early exits.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use voxsr_core::{Coord, Rgb, VoxelFrame};

pub type CoordSet = HashSet<Coord>;

/// Morton key by explicit bit interleaving, x most significant.
pub fn morton_slow(c: Coord) -> u64 {
    let mut key = 0u64;
    for b in (0..21).rev() {
        for &v in &c {
            key = (key << 1) | u64::from((v >> b) & 1);
        }
    }
    key
}

pub fn random_frame(rng: &mut ChaCha8Rng, depth: u8, n: usize, colored: bool) -> VoxelFrame {
    let side = 1u32 << depth;
    let set: CoordSet = (0..n)
        .map(|_| [rng.random_range(0..side), rng.random_range(0..side), rng.random_range(0..side)])
        .collect();
    let voxels: Vec<Coord> = set.into_iter().collect();
    let colors = colored.then(|| voxels.iter().map(|_| rng.random::<Rgb>()).collect());
    VoxelFrame::new(depth, &voxels, colors).unwrap()
}

/// Spatially clustered frame: a random walk, so neighborhoods are non-trivial.
pub fn clustered_frame(rng: &mut ChaCha8Rng, depth: u8, n: usize) -> VoxelFrame {
    let side = 1i64 << depth;
    let mut set = CoordSet::new();
    let mut p = [side / 2; 3];
    let mut steps = 0;
    while set.len() < n && steps < 50 * n {
        steps += 1;
        for a in p.iter_mut() {
            *a = (*a + rng.random_range(-1..=1)).clamp(0, side - 1);
        }
        set.insert(p.map(|v| v as u32));
    }
    let voxels: Vec<Coord> = set.into_iter().collect();
    VoxelFrame::new(depth, &voxels, None).unwrap()
}

pub fn coord_set(frame: &VoxelFrame) -> CoordSet {
    frame.coords().collect()
}

pub fn halve(set: &CoordSet) -> CoordSet {
    set.iter().map(|c| c.map(|v| v >> 1)).collect()
}

pub fn neighborhood_oracle(set: &CoordSet, side: u32, c: Coord) -> u32 {
    let mut bits = 0u32;
    let mut i = 0;
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            for dz in -1i64..=1 {
                if (dx, dy, dz) == (0, 0, 0) {
                    continue;
                }
                let n = [i64::from(c[0]) + dx, i64::from(c[1]) + dy, i64::from(c[2]) + dz];
                if n.iter().all(|&v| v >= 0 && v < i64::from(side))
                    && set.contains(&n.map(|v| v as u32))
                {
                    bits |= 1 << i;
                }
                i += 1;
            }
        }
    }
    bits
}

pub fn popcount_slow(mut v: u32) -> u32 {
    let mut n = 0;
    for _ in 0..32 {
        n += v & 1;
        v >>= 1;
    }
    n
}

fn sq_dist(a: Coord, b: Coord) -> u64 {
    (0..3).map(|i| (i64::from(a[i]) - i64::from(b[i])).pow(2) as u64).sum()
}

fn chebyshev(a: Coord, b: Coord) -> u32 {
    (0..3).map(|i| a[i].abs_diff(b[i])).max().unwrap()
}

/// Exhaustive best match: score every reference voxel, keep the window, sort.
pub fn best_match_oracle(
    target: &CoordSet,
    coord: Coord,
    reference: &CoordSet,
    side: u32,
    window: u32,
) -> Option<(Coord, u32, u64)> {
    let t = neighborhood_oracle(target, side, coord);
    let mut scored: Vec<(u32, u64, u64, Coord)> = reference
        .iter()
        .filter(|&&r| chebyshev(r, coord) <= window)
        .map(|&r| {
            let cost = popcount_slow(t ^ neighborhood_oracle(reference, side, r));
            (cost, sq_dist(r, coord), morton_slow(r), r)
        })
        .collect();
    scored.sort();
    scored.first().map(|&(cost, d, _, r)| (r, cost, d))
}

/// Super-resolution by exhaustive search over every reference voxel.
pub fn super_resolve_oracle(target_low: &VoxelFrame, refs_full: &[VoxelFrame], window: u32) -> CoordSet {
    let side = target_low.side();
    let target = coord_set(target_low);
    let refs: Vec<(CoordSet, CoordSet)> = refs_full
        .iter()
        .map(|r| {
            let full = coord_set(r);
            (halve(&full), full)
        })
        .collect();
    let mut out = CoordSet::new();
    for &p in &target {
        let mut best: Option<((u32, u64, u64, usize), Coord)> = None;
        for (ri, (low, _)) in refs.iter().enumerate() {
            if let Some((cand, cost, d)) = best_match_oracle(&target, p, low, side, window) {
                let key = (cost, d, morton_slow(cand), ri);
                if best.is_none_or(|(b, _)| key < b) {
                    best = Some((key, cand));
                }
            }
        }
        for dx in 0..2 {
            for dy in 0..2 {
                for dz in 0..2 {
                    let child = [2 * p[0] + dx, 2 * p[1] + dy, 2 * p[2] + dz];
                    let keep = match best {
                        None => true,
                        Some(((_, _, _, ri), q)) => {
                            refs[ri].1.contains(&[2 * q[0] + dx, 2 * q[1] + dy, 2 * q[2] + dz])
                        }
                    };
                    if keep {
                        out.insert(child);
                    }
                }
            }
        }
    }
    out
}

/// Render of one face by scanning each pixel's whole column front to back.
/// Face index: 0 X-, 1 X+, 2 Y-, 3 Y+, 4 Z-, 5 Z+.
pub fn render_oracle(frame: &VoxelFrame, face: usize) -> HashMap<(u32, u32), (u32, Rgb)> {
    let side = frame.side();
    let colors: HashMap<Coord, Rgb> = frame
        .coords()
        .enumerate()
        .map(|(i, c)| (c, frame.colors().map_or([128; 3], |cs| cs[i])))
        .collect();
    let mut img = HashMap::new();
    for u in 0..side {
        for v in 0..side {
            for d in 0..side {
                let along = if face.is_multiple_of(2) { d } else { side - 1 - d };
                let c = match face / 2 {
                    0 => [along, u, v],
                    1 => [u, along, v],
                    _ => [u, v, along],
                };
                if let Some(&rgb) = colors.get(&c) {
                    img.insert((u, v), (d, rgb));
                    break;
                }
            }
        }
    }
    img
}

/// Per-face PSNR over both-occupied pixels, from the column-scan renders.
pub fn projection_oracle(a: &VoxelFrame, b: &VoxelFrame) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (face, slot) in out.iter_mut().enumerate() {
        let ra = render_oracle(a, face);
        let rb = render_oracle(b, face);
        let mut sum = 0.0;
        let mut n = 0usize;
        for (px, (_, ca)) in &ra {
            if let Some((_, cb)) = rb.get(px) {
                for ch in 0..3 {
                    sum += (f64::from(ca[ch]) - f64::from(cb[ch])).powi(2);
                }
                n += 1;
            }
        }
        let mse = if n == 0 { 0.0 } else { sum / (3 * n) as f64 };
        *slot = if mse == 0.0 { f64::INFINITY } else { 10.0 * (255.0f64 * 255.0 / mse).log10() };
    }
    out
}

pub fn finite_mean(v: &[f64]) -> f64 {
    let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
    if f.is_empty() {
        f64::INFINITY
    } else {
        f.iter().sum::<f64>() / f.len() as f64
    }
}

/// Symmetric point-to-point PSNR via all-pairs distances.
pub fn d1_oracle(a: &VoxelFrame, b: &VoxelFrame) -> f64 {
    let pa: Vec<Coord> = a.coords().collect();
    let pb: Vec<Coord> = b.coords().collect();
    let one = |from: &[Coord], to: &[Coord]| {
        from.iter()
            .map(|&p| to.iter().map(|&q| sq_dist(p, q)).min().unwrap() as f64)
            .sum::<f64>()
            / from.len() as f64
    };
    let mse = one(&pa, &pb).max(one(&pb, &pa));
    let peak = f64::from(a.side() - 1);
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (3.0 * peak * peak / mse).log10()
    }
}
