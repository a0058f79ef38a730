//! FPN anchor grids.
//!
//! The default configuration places one square anchor of side `4 * stride`
//! at the center of every cell on strides 8, 16, 32, 64 and 128. The stride
//! set is not published alongside the anchor configuration; it is the one
//! that reproduces 6416 anchors on a 550x550 image (12832 with scales 4
//! and 8).

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnchorConfig {
    pub strides: Vec<u32>,
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    pub offset: f64,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            strides: vec![8, 16, 32, 64, 128],
            scales: vec![4.0],
            ratios: vec![1.0],
            offset: 0.5,
        }
    }
}

impl AnchorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("anchor config: {msg}")));
        if self.strides.is_empty() || self.scales.is_empty() || self.ratios.is_empty() {
            return bad("strides, scales and ratios must be non-empty");
        }
        if self.strides.contains(&0) || self.strides.windows(2).any(|w| w[0] >= w[1]) {
            return bad("strides must be positive and strictly increasing");
        }
        if self
            .scales
            .iter()
            .chain(&self.ratios)
            .any(|&v| !(v.is_finite() && v > 0.0))
        {
            return bad("scales and ratios must be positive");
        }
        if !(0.0..=1.0).contains(&self.offset) {
            return bad("offset must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn anchors_per_location(&self) -> usize {
        self.scales.len() * self.ratios.len()
    }
}

/// One FPN level inside an [`AnchorSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub stride: u32,
    pub rows: u32,
    pub cols: u32,
    /// Global index of the first anchor on this level.
    pub start: usize,
    pub len: usize,
}

/// Structured position of an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnchorIndex {
    pub level: usize,
    pub row: u32,
    pub col: u32,
    /// Index into `scales x ratios`, scale-major.
    pub shape: usize,
}

/// Anchors of all levels in one flat array.
///
/// Global order is level-major, then row-major over grid cells, then the
/// per-location anchors (scale-major, ratio-minor).
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    boxes: Vec<BBox>,
    levels: Vec<Level>,
    per_location: usize,
}

impl AnchorSet {
    /// Wraps explicit boxes, one inner vector per level. The grid structure
    /// of such levels is a single row.
    pub fn from_levels(levels: Vec<Vec<BBox>>) -> Self {
        let mut boxes = Vec::new();
        let mut out = Vec::with_capacity(levels.len());
        for (i, level) in levels.into_iter().enumerate() {
            out.push(Level {
                stride: i as u32 + 1,
                rows: 1,
                cols: level.len() as u32,
                start: boxes.len(),
                len: level.len(),
            });
            boxes.extend(level);
        }
        Self {
            boxes,
            levels: out,
            per_location: 1,
        }
    }

    pub fn boxes(&self) -> &[BBox] {
        &self.boxes
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn level_boxes(&self, level: usize) -> &[BBox] {
        let l = &self.levels[level];
        &self.boxes[l.start..l.start + l.len]
    }

    pub fn level_of(&self, index: usize) -> usize {
        self.levels.partition_point(|l| l.start + l.len <= index)
    }

    pub fn flat_index(&self, idx: AnchorIndex) -> usize {
        let l = &self.levels[idx.level];
        l.start + ((idx.row * l.cols + idx.col) as usize) * self.per_location + idx.shape
    }

    pub fn structured_index(&self, index: usize) -> AnchorIndex {
        let level = self.level_of(index);
        let l = &self.levels[level];
        let local = index - l.start;
        let cell = local / self.per_location;
        AnchorIndex {
            level,
            row: cell as u32 / l.cols,
            col: cell as u32 % l.cols,
            shape: local % self.per_location,
        }
    }
}

/// `(ceil(h / stride), ceil(w / stride))`.
pub fn level_dims(image_h: u32, image_w: u32, stride: u32) -> (u32, u32) {
    (image_h.div_ceil(stride), image_w.div_ceil(stride))
}

/// Generates unclipped anchors for an `image_h x image_w` image.
pub fn generate(image_h: u32, image_w: u32, cfg: &AnchorConfig) -> Result<AnchorSet> {
    cfg.validate()?;
    if image_h == 0 || image_w == 0 {
        return Err(Error::InvalidConfig(format!(
            "image dimensions must be positive, got {image_h}x{image_w}"
        )));
    }
    let per_location = cfg.anchors_per_location();
    let shapes: Vec<(f64, f64)> = cfg
        .scales
        .iter()
        .flat_map(|&scale| {
            cfg.ratios.iter().map(move |&ratio| {
                let r = ratio.sqrt();
                (scale * r, scale / r)
            })
        })
        .collect();

    let mut boxes = Vec::new();
    let mut levels = Vec::with_capacity(cfg.strides.len());
    for &stride in &cfg.strides {
        let (rows, cols) = level_dims(image_h, image_w, stride);
        let start = boxes.len();
        let s = stride as f64;
        for row in 0..rows {
            let cy = (row as f64 + cfg.offset) * s;
            for col in 0..cols {
                let cx = (col as f64 + cfg.offset) * s;
                for &(wf, hf) in &shapes {
                    boxes.push(BBox::from_center(cx, cy, wf * s, hf * s)?);
                }
            }
        }
        levels.push(Level {
            stride,
            rows,
            cols,
            start,
            len: boxes.len() - start,
        });
    }
    Ok(AnchorSet {
        boxes,
        levels,
        per_location,
    })
}
