//! Mask-aware IoU.
//!
//! maIoU reweights the pixels of a ground-truth box `B`. Off-mask pixels get
//! weight zero and on-mask pixels get `|B| / |M|`, so the total weight of
//! `B` is still `|B|`. The mask-aware intersection with an anchor `Â` is
//! then `|B| / |M| * |Â ∩ M|`, the mask-aware union equals the plain union,
//! and
//!
//! ```text
//! maIoU(Â, B, M) = |B| * |Â ∩ M| / (|M| * |Â ∪ B|)
//! ```
//!
//! Every quantity is an exact pixel count on the image grid. Boxes are
//! mapped to pixels with [`discretize`], so anchors hanging over the border
//! are clipped. Only mask pixels inside the discretized ground-truth box
//! count, for both `|M|` and `|Â ∩ M|`. This keeps `maIoU(B, B, M) = 1` even
//! when an annotation's mask leaks slightly outside its box.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{self, BBox};
use crate::raster::{
    build_integral, discretize, mask_in_box, mask_total, BinaryMask, IntegralImage, PixelBox,
};
use crate::{Error, Result};

/// One annotated object: its box, its mask and the cached integral image.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    bbox: BBox,
    mask: BinaryMask,
    integral: IntegralImage,
    pixel_box: PixelBox,
    mask_count: u64,
    box_mask_count: u64,
    category: u64,
}

impl GroundTruth {
    /// Builds the integral image once; every later query is O(1).
    ///
    /// Fails if the box does not overlap the mask's grid.
    pub fn new(bbox: BBox, mask: BinaryMask, category: u64) -> Result<Self> {
        let pixel_box = discretize(&bbox, mask.height(), mask.width()).ok_or_else(|| {
            Error::InvalidAnnotation(format!(
                "box ({}, {}, {}, {}) does not overlap the {}x{} mask grid",
                bbox.x1(),
                bbox.y1(),
                bbox.x2(),
                bbox.y2(),
                mask.height(),
                mask.width()
            ))
        })?;
        let integral = build_integral(&mask);
        let mask_count = mask_total(&integral);
        let box_mask_count = mask_in_box(&integral, &pixel_box);
        if box_mask_count == 0 {
            log::warn!("ground truth with an empty mask inside its box; maIoU falls back to IoU");
        }
        Ok(Self {
            bbox,
            mask,
            integral,
            pixel_box,
            mask_count,
            box_mask_count,
            category,
        })
    }

    pub fn bbox(&self) -> &BBox {
        &self.bbox
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.mask
    }

    pub fn integral(&self) -> &IntegralImage {
        &self.integral
    }

    /// Discretized ground-truth box.
    pub fn pixel_box(&self) -> &PixelBox {
        &self.pixel_box
    }

    /// Total mask pixels, `|M|`.
    pub fn mask_count(&self) -> u64 {
        self.mask_count
    }

    /// Mask pixels inside the discretized box.
    pub fn box_mask_count(&self) -> u64 {
        self.box_mask_count
    }

    pub fn category(&self) -> u64 {
        self.category
    }

    pub fn image_height(&self) -> u32 {
        self.mask.height()
    }

    pub fn image_width(&self) -> u32 {
        self.mask.width()
    }

    /// True when maIoU is undefined and falls back to pixel-domain IoU.
    pub fn is_degenerate(&self) -> bool {
        self.box_mask_count == 0
    }
}

/// Exact pixel counts behind one maIoU value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MaIouCounts {
    /// `|B|`
    pub gt_area: u64,
    /// `|M|`, restricted to the ground-truth box
    pub gt_mask: u64,
    /// `|Â|`, clipped to the image
    pub anchor_area: u64,
    /// `|Â ∩ B|`
    pub intersection: u64,
    /// `|Â ∩ M|`
    pub covered_mask: u64,
    /// `|Â ∪ B|`
    pub union: u64,
}

impl MaIouCounts {
    /// Set when the mask is empty and the value is plain pixel IoU.
    pub fn is_fallback(&self) -> bool {
        self.gt_mask == 0
    }

    pub fn value(&self) -> f64 {
        if self.is_fallback() {
            return self.intersection as f64 / self.union as f64;
        }
        let num = self.gt_area as u128 * self.covered_mask as u128;
        let den = self.gt_mask as u128 * self.union as u128;
        num as f64 / den as f64
    }

    /// Pixel-domain IoU from the same counts.
    pub fn pixel_iou(&self) -> f64 {
        self.intersection as f64 / self.union as f64
    }
}

/// Mask-over-box ratio `|b ∩ M| / |b|` in pixels; 0 if `b` is off the grid.
pub fn mob(b: &BBox, gt: &GroundTruth) -> f64 {
    match discretize(b, gt.image_height(), gt.image_width()) {
        Some(pb) => mask_in_box(&gt.integral, &pb) as f64 / pb.area() as f64,
        None => 0.0,
    }
}

/// maIoU counts from four integral-image lookups.
#[inline]
pub fn maiou_fast_counts(anchor: &BBox, gt: &GroundTruth) -> MaIouCounts {
    let g = gt.pixel_box;
    let gt_area = g.area();
    let Some(a) = discretize(anchor, gt.image_height(), gt.image_width()) else {
        return MaIouCounts {
            gt_area,
            gt_mask: gt.box_mask_count,
            anchor_area: 0,
            intersection: 0,
            covered_mask: 0,
            union: gt_area,
        };
    };
    let overlap = a.intersection(&g);
    let intersection = overlap.map_or(0, |o| o.area());
    let covered_mask = overlap.map_or(0, |o| mask_in_box(&gt.integral, &o));
    MaIouCounts {
        gt_area,
        gt_mask: gt.box_mask_count,
        anchor_area: a.area(),
        intersection,
        covered_mask,
        union: a.area() + gt_area - intersection,
    }
}

pub fn maiou_fast(anchor: &BBox, gt: &GroundTruth) -> f64 {
    maiou_fast_counts(anchor, gt).value()
}

/// maIoU counts by visiting every pixel of `Â ∪ B` and reading the mask
/// directly. Ignores the cached integral image and mask counts.
pub fn maiou_brute_counts(anchor: &BBox, gt: &GroundTruth) -> MaIouCounts {
    let (h, w) = (gt.image_height(), gt.image_width());
    let mask = &gt.mask;
    let g = discretize(&gt.bbox, h, w).expect("ground-truth box is on the grid");

    let (mut gt_area, mut gt_mask) = (0u64, 0u64);
    for row in g.y1()..g.y2() {
        for col in g.x1()..g.x2() {
            gt_area += 1;
            gt_mask += mask.get(row, col) as u64;
        }
    }

    let mut union = gt_area;
    let (mut anchor_area, mut intersection, mut covered_mask) = (0u64, 0u64, 0u64);
    if let Some(a) = discretize(anchor, h, w) {
        for row in a.y1()..a.y2() {
            for col in a.x1()..a.x2() {
                anchor_area += 1;
                if g.contains(row, col) {
                    intersection += 1;
                    covered_mask += mask.get(row, col) as u64;
                } else {
                    union += 1;
                }
            }
        }
    }
    MaIouCounts {
        gt_area,
        gt_mask,
        anchor_area,
        intersection,
        covered_mask,
        union,
    }
}

pub fn maiou_brute(anchor: &BBox, gt: &GroundTruth) -> f64 {
    maiou_brute_counts(anchor, gt).value()
}

/// Pixel-domain IoU between an anchor and a ground-truth box.
pub fn pixel_iou(anchor: &BBox, gt: &GroundTruth) -> f64 {
    maiou_fast_counts(anchor, gt).pixel_iou()
}

/// Anchor-to-ground-truth proximity used by the assigners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProximityMeasure {
    Iou,
    Giou,
    Diou,
    Maiou,
}

impl ProximityMeasure {
    pub const ALL: [ProximityMeasure; 4] = [Self::Iou, Self::Giou, Self::Diou, Self::Maiou];

    pub fn name(self) -> &'static str {
        match self {
            Self::Iou => "iou",
            Self::Giou => "giou",
            Self::Diou => "diou",
            Self::Maiou => "maiou",
        }
    }

    /// IoU, GIoU and DIoU in the continuous domain, maIoU in pixels.
    #[inline]
    pub fn eval(self, anchor: &BBox, gt: &GroundTruth) -> f64 {
        match self {
            Self::Iou => geometry::iou(anchor, &gt.bbox),
            Self::Giou => geometry::giou(anchor, &gt.bbox),
            Self::Diou => geometry::diou(anchor, &gt.bbox),
            Self::Maiou => maiou_fast(anchor, gt),
        }
    }
}

impl fmt::Display for ProximityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProximityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown measure '{s}', expected one of: iou, giou, diou, maiou"
                ))
            })
    }
}

/// Dense row-major `anchors x gts` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ProximityMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Multiplies one column in place.
    pub fn scale_column(&mut self, col: usize, factor: f64) {
        for row in 0..self.rows {
            self.data[row * self.cols + col] *= factor;
        }
    }
}

/// Evaluates `measure` for every (anchor, ground truth) pair.
pub fn pairwise(
    anchors: &[BBox],
    gts: &[GroundTruth],
    measure: ProximityMeasure,
) -> ProximityMatrix {
    let cols = gts.len();
    let mut data = vec![0.0; anchors.len() * cols];
    if cols == 0 {
        return ProximityMatrix::from_vec(anchors.len(), 0, data);
    }
    let fill = |(anchor, row): (&BBox, &mut [f64])| {
        for (out, gt) in row.iter_mut().zip(gts) {
            *out = measure.eval(anchor, gt);
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        anchors
            .par_iter()
            .zip(data.par_chunks_mut(cols))
            .with_min_len(256)
            .for_each(fill);
    }
    #[cfg(not(feature = "parallel"))]
    anchors.iter().zip(data.chunks_mut(cols)).for_each(fill);
    ProximityMatrix::from_vec(anchors.len(), cols, data)
}
