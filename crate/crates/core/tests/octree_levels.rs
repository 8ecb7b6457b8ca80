mod common;

use common::{coord_set, halve, random_frame};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxsr_core::{downsample, octree, VoxelFrame};

#[test]
fn round_trip_many_random_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for i in 0..120 {
        let depth = 2 + (i % 6) as u8;
        let n = rng.random_range(1..600);
        let f = random_frame(&mut rng, depth, n, false);
        let s = octree::encode(&f).unwrap();
        assert_eq!(octree::decode(&s).unwrap(), f, "frame {i}");
    }
}

#[test]
fn truncated_decode_matches_halving_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random_frame(&mut rng, 6, 900, false);
    let s = octree::encode(&f).unwrap();
    let mut expect = coord_set(&f);
    for levels in (1..=6u8).rev() {
        let got = octree::decode_levels(&s, levels).unwrap();
        assert_eq!(got.depth(), levels);
        assert_eq!(coord_set(&got), expect, "levels {levels}");
        expect = halve(&expect);
    }
}

#[test]
fn colors_are_not_carried() {
    let f = VoxelFrame::new(2, &[[1, 2, 3]], Some(vec![[9, 9, 9]])).unwrap();
    let back = octree::decode(&octree::encode(&f).unwrap()).unwrap();
    assert!(back.colors().is_none());
    assert!(back.same_geometry(&f));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_decode_equals_repeated_downsample(seed in any::<u64>(), depth in 2u8..=7, n in 1usize..400) {
        let f = random_frame(&mut ChaCha8Rng::seed_from_u64(seed), depth, n, false);
        let s = octree::encode(&f).unwrap();
        let mut lower = f.clone();
        for levels in (1..depth).rev() {
            lower = downsample(&lower).unwrap();
            prop_assert_eq!(octree::decode_levels(&s, levels).unwrap(), lower.clone());
        }
    }
}
