//! WebAssembly bindings for the browser playground in `www/`.
//!
//! A [`Playground`] holds one ground truth (box plus mask) on a square
//! image. The page drags anchors over it, paints the mask, draws a maIoU
//! heatmap and shows how the assigners label the anchor grid.

use maiou_core::anchors::{self, AnchorConfig, AnchorSet};
use maiou_core::assigner::{AssignerSpec, Label};
use maiou_core::geometry::{diou, giou, iou};
use maiou_core::maiou::{maiou_fast, mob};
use maiou_core::raster::{rasterize_polygon, BinaryMask};
use maiou_core::{BBox, GroundTruth};
use wasm_bindgen::prelude::*;

/// Preset shapes in box-relative coordinates.
const SHAPES: &[(&str, &[(f64, f64)])] = &[
    ("full", &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]),
    ("half", &[(0.0, 0.0), (0.5, 0.0), (0.5, 1.0), (0.0, 1.0)]),
    (
        "l-shape",
        &[
            (0.0, 0.0),
            (0.35, 0.0),
            (0.35, 0.65),
            (1.0, 0.65),
            (1.0, 1.0),
            (0.0, 1.0),
        ],
    ),
    (
        "diagonal",
        &[
            (0.0, 0.0),
            (0.25, 0.0),
            (1.0, 0.75),
            (1.0, 1.0),
            (0.75, 1.0),
            (0.0, 0.25),
        ],
    ),
    ("triangle", &[(0.5, 0.0), (1.0, 1.0), (0.0, 1.0)]),
];

#[wasm_bindgen]
pub struct Playground {
    size: u32,
    gt: GroundTruth,
    anchors: AnchorSet,
}

fn shape_mask(name: &str, b: &BBox, size: u32) -> Result<BinaryMask, String> {
    let (_, rel) = SHAPES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| format!("unknown shape '{name}'"))?;
    let verts: Vec<(f64, f64)> = rel
        .iter()
        .map(|&(u, v)| (b.x1() + u * b.width(), b.y1() + v * b.height()))
        .collect();
    rasterize_polygon(&verts, size, size).map_err(|e| e.to_string())
}

#[wasm_bindgen]
impl Playground {
    /// A `size x size` image with an L-shaped object.
    #[wasm_bindgen(constructor)]
    pub fn new(size: u32) -> Playground {
        let size = size.clamp(32, 512);
        let s = size as f64;
        let b = BBox::new(0.25 * s, 0.25 * s, 0.75 * s, 0.75 * s).expect("valid default box");
        let mask = shape_mask("l-shape", &b, size).expect("preset shape");
        let cfg = AnchorConfig {
            strides: vec![8, 16, 32],
            ..AnchorConfig::default()
        };
        Playground {
            size,
            gt: GroundTruth::new(b, mask, 1).expect("default box lies on the image"),
            anchors: anchors::generate(size, size, &cfg).expect("valid anchor config"),
        }
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn shapes() -> Vec<String> {
        SHAPES.iter().map(|(n, _)| n.to_string()).collect()
    }

    /// Replaces box and mask with a preset shape filling the box.
    pub fn set_shape(
        &mut self,
        name: &str,
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
    ) -> Result<(), String> {
        let s = self.size as f64;
        let b = BBox::new(
            x1.clamp(0.0, s),
            y1.clamp(0.0, s),
            x2.clamp(0.0, s),
            y2.clamp(0.0, s),
        )
        .map_err(|e| e.to_string())?;
        let mask = shape_mask(name, &b, self.size)?;
        self.gt = GroundTruth::new(b, mask, 1).map_err(|e| e.to_string())?;
        Ok(())
    }

    /// Sets or clears a disc of mask pixels; the box stays where it is.
    pub fn paint(&mut self, x: f64, y: f64, radius: f64, on: bool) {
        let mut mask = self.gt.mask().clone();
        let r2 = radius * radius;
        for row in 0..self.size {
            for col in 0..self.size {
                let dx = col as f64 + 0.5 - x;
                let dy = row as f64 + 0.5 - y;
                if dx * dx + dy * dy <= r2 {
                    mask.set(row, col, on);
                }
            }
        }
        self.gt = GroundTruth::new(*self.gt.bbox(), mask, 1).expect("box unchanged");
    }

    /// Ground-truth box as `[x1, y1, x2, y2]`.
    pub fn gt_box(&self) -> Vec<f64> {
        let b = self.gt.bbox();
        vec![b.x1(), b.y1(), b.x2(), b.y2()]
    }

    /// Row-major mask, one byte per pixel.
    pub fn mask_pixels(&self) -> Vec<u8> {
        self.gt.mask().as_slice().iter().map(|&m| m as u8).collect()
    }

    /// `[IoU, GIoU, DIoU, maIoU, MOB]` of an anchor against the ground truth.
    pub fn measures(&self, x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Vec<f64>, String> {
        let a = BBox::new(x1, y1, x2, y2).map_err(|e| e.to_string())?;
        let b = self.gt.bbox();
        Ok(vec![
            iou(&a, b),
            giou(&a, b),
            diou(&a, b),
            maiou_fast(&a, &self.gt),
            mob(&a, &self.gt),
        ])
    }

    /// maIoU of a `side x side` anchor centred on the top-left corner of
    /// every pixel, row-major.
    pub fn heatmap(&self, side: f64) -> Vec<f64> {
        let half = side.max(1.0) / 2.0;
        let mut out = Vec::with_capacity((self.size * self.size) as usize);
        for row in 0..self.size {
            for col in 0..self.size {
                let cx = col as f64;
                let cy = row as f64;
                let a =
                    BBox::new(cx - half, cy - half, cx + half, cy + half).expect("positive side");
                out.push(maiou_fast(&a, &self.gt));
            }
        }
        out
    }

    /// Anchor grid flattened as `x1, y1, x2, y2` per anchor.
    pub fn anchor_boxes(&self) -> Vec<f64> {
        self.anchors
            .boxes()
            .iter()
            .flat_map(|b| [b.x1(), b.y1(), b.x2(), b.y2()])
            .collect()
    }

    /// Labels every anchor with an assigner spec such as `atss:maiou:9`:
    /// 1 positive, 0 negative, -1 ignored.
    pub fn assign(&self, spec: &str) -> Result<Vec<i32>, String> {
        let spec: AssignerSpec = spec.parse().map_err(|e: maiou_core::Error| e.to_string())?;
        let result = spec
            .run(&self.anchors, std::slice::from_ref(&self.gt))
            .map_err(|e| e.to_string())?;
        Ok(result
            .labels
            .iter()
            .map(|l| match l {
                Label::Positive(_) => 1,
                Label::Negative => 0,
                Label::Ignore => -1,
            })
            .collect())
    }
}
