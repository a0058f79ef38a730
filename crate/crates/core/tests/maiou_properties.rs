//! Property tests for maIoU against the brute-force pixel-counting oracle.

use maiou_core::geometry::BBox;
use maiou_core::maiou::{
    maiou_brute, maiou_brute_counts, maiou_fast, maiou_fast_counts, mob, pixel_iou,
};
use maiou_core::raster::{discretize, BinaryMask};
use maiou_core::GroundTruth;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random scene: a ground truth with a blob-ish mask (pixels near the box
/// interior are likelier), plus an anchor that may hang off the image.
fn scene(seed: u64, grid: u32) -> (BBox, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = grid as f64;
    let x1 = rng.gen_range(-2.0..g - 1.0);
    let y1 = rng.gen_range(-2.0..g - 1.0);
    let bbox = BBox::new(
        x1,
        y1,
        rng.gen_range(x1.max(0.0) + 0.5..g + 2.0),
        rng.gen_range(y1.max(0.0) + 0.5..g + 2.0),
    )
    .unwrap();
    let density = rng.gen_range(0.0..1.0);
    let leak = rng.gen_bool(0.2);
    let pb = discretize(&bbox, grid, grid).unwrap();
    let mask = BinaryMask::from_fn(grid, grid, |r, c| {
        (leak || pb.contains(r, c)) && rng.gen_bool(density)
    })
    .unwrap();
    let ax = rng.gen_range(-g..2.0 * g);
    let ay = rng.gen_range(-g..2.0 * g);
    let anchor = BBox::new(
        ax,
        ay,
        ax + rng.gen_range(0.25..g),
        ay + rng.gen_range(0.25..g),
    )
    .unwrap();
    (anchor, GroundTruth::new(bbox, mask, 0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn fast_equals_brute(seed in any::<u64>(), grid in 8u32..=96) {
        let (anchor, gt) = scene(seed, grid);
        prop_assert_eq!(maiou_fast_counts(&anchor, &gt), maiou_brute_counts(&anchor, &gt));
        prop_assert_eq!(maiou_fast(&anchor, &gt).to_bits(), maiou_brute(&anchor, &gt).to_bits());
    }

    #[test]
    fn bounded(seed in any::<u64>(), grid in 8u32..=96) {
        let (anchor, gt) = scene(seed, grid);
        let v = maiou_fast(&anchor, &gt);
        prop_assert!((0.0..=1.0).contains(&v), "{}", v);
        prop_assert!((0.0..=1.0).contains(&mob(&anchor, &gt)));
    }

    #[test]
    fn union_identity(seed in any::<u64>(), grid in 8u32..=64) {
        let (anchor, gt) = scene(seed, grid);
        // brute force counts the union directly; check it against |A| + |B| - |A ∩ B|
        let c = maiou_brute_counts(&anchor, &gt);
        prop_assert_eq!(c.union, c.anchor_area + c.gt_area - c.intersection);
    }

    #[test]
    fn self_match(seed in any::<u64>(), grid in 8u32..=96) {
        let (_, gt) = scene(seed, grid);
        if !gt.is_degenerate() {
            prop_assert_eq!(maiou_fast(gt.bbox(), &gt), 1.0);
            prop_assert_eq!(maiou_brute(gt.bbox(), &gt), 1.0);
        }
    }

    #[test]
    fn full_mask_reduces_to_pixel_iou(seed in any::<u64>(), grid in 8u32..=96) {
        let (anchor, gt) = scene(seed, grid);
        let pb = *gt.pixel_box();
        let full = BinaryMask::from_fn(grid, grid, |r, c| pb.contains(r, c)).unwrap();
        let gt = GroundTruth::new(*gt.bbox(), full, 0).unwrap();
        prop_assert_eq!(mob(gt.bbox(), &gt), 1.0);
        prop_assert_eq!(maiou_fast(&anchor, &gt), pixel_iou(&anchor, &gt));
    }

    #[test]
    fn integer_upscale_invariant(seed in any::<u64>(), grid in 8u32..=48, s in 2u32..=3) {
        let (anchor, gt) = scene(seed, grid);
        // Fractional corners do not commute with floor/ceil under scaling;
        // compare on the integer cover of each box.
        let snap = |b: &BBox| BBox::new(b.x1().floor(), b.y1().floor(), b.x2().ceil(), b.y2().ceil()).unwrap();
        let gt_int = GroundTruth::new(snap(gt.bbox()), gt.mask().clone(), 0).unwrap();
        let up_int = GroundTruth::new(snap(gt.bbox()).scale(s as f64).unwrap(), gt.mask().upscale(s).unwrap(), 0).unwrap();
        let a_int = snap(&anchor);
        prop_assert_eq!(maiou_fast(&a_int, &gt_int), maiou_fast(&a_int.scale(s as f64).unwrap(), &up_int));
    }
}
