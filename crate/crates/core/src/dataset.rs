//! COCO-instances ingestion.
//!
//! Masks are rasterized at the native image resolution. Polygons (several
//! parts are unioned) and uncompressed RLE are supported; compressed RLE is
//! rejected with [`Error::UnsupportedFormat`]. Ground-truth boxes come from
//! the `bbox` field, clamped to the image.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::geometry::BBox;
use crate::maiou::GroundTruth;
use crate::raster::{decode_rle, discretize, rasterize_polygon, BinaryMask};
use crate::{Error, Result};

/// Small annotation file with 3 images and 7 annotations.
pub const BUNDLED_SAMPLE: &str = include_str!("../tests/fixtures/mini_instances.json");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadOptions {
    pub include_crowd: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ImageInfo {
    pub id: u64,
    pub width: u32,
    pub height: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Annotation {
    pub id: u64,
    pub image_id: u64,
    pub bbox: [f64; 4],
    pub segmentation: Segmentation,
    #[serde(default)]
    pub iscrowd: u8,
    #[serde(default)]
    pub category_id: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Segmentation {
    Polygons(Vec<Vec<f64>>),
    Rle(Rle),
}

#[derive(Debug, Clone, Deserialize)]
pub struct Rle {
    pub counts: RleCounts,
    /// `[height, width]`
    pub size: [u32; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RleCounts {
    Uncompressed(Vec<u64>),
    Compressed(String),
}

#[derive(Debug, Deserialize)]
struct RawFile {
    images: Vec<ImageInfo>,
    #[serde(default)]
    annotations: Vec<Annotation>,
}

/// One image and its usable ground truths.
#[derive(Debug, Clone)]
pub struct Scene {
    pub image_id: u64,
    pub width: u32,
    pub height: u32,
    pub gts: Vec<GroundTruth>,
    pub annotation_ids: Vec<u64>,
}

/// Counts of annotations dropped or flagged while building scenes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadWarnings {
    pub skipped_crowd: usize,
    pub skipped_degenerate_boxes: usize,
    pub skipped_polygon_parts: usize,
    pub empty_masks: usize,
    /// Mask extent and bbox overlap by less than 90%.
    pub extent_mismatch: usize,
}

impl LoadWarnings {
    pub fn merge(&mut self, other: &LoadWarnings) {
        self.skipped_crowd += other.skipped_crowd;
        self.skipped_degenerate_boxes += other.skipped_degenerate_boxes;
        self.skipped_polygon_parts += other.skipped_polygon_parts;
        self.empty_masks += other.empty_masks;
        self.extent_mismatch += other.extent_mismatch;
    }
}

/// A parsed annotation file, grouped by image and ordered by id.
#[derive(Debug, Clone)]
pub struct CocoInstances {
    origin: PathBuf,
    images: Vec<ImageInfo>,
    by_image: BTreeMap<u64, Vec<Annotation>>,
}

impl CocoInstances {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    /// `origin` only labels error messages.
    pub fn from_json(text: &str, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref().to_owned();
        let raw: RawFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.clone(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let mut images = raw.images;
        images.sort_by_key(|img| img.id);
        let mut by_image: BTreeMap<u64, Vec<Annotation>> = BTreeMap::new();
        for ann in raw.annotations {
            by_image.entry(ann.image_id).or_default().push(ann);
        }
        for anns in by_image.values_mut() {
            anns.sort_by_key(|a| a.id);
        }
        Ok(Self {
            origin,
            images,
            by_image,
        })
    }

    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_SAMPLE, "mini_instances.json").expect("bundled sample parses")
    }

    pub fn origin(&self) -> &Path {
        &self.origin
    }

    pub fn images(&self) -> &[ImageInfo] {
        &self.images
    }

    pub fn annotation_count(&self) -> usize {
        self.by_image.values().map(Vec::len).sum()
    }

    /// Builds the scene for `images()[index]`, or `None` when the image
    /// has no usable annotation.
    pub fn build_scene(
        &self,
        index: usize,
        opts: &LoadOptions,
        warnings: &mut LoadWarnings,
    ) -> Result<Option<Scene>> {
        let image = &self.images[index];
        let Some(anns) = self.by_image.get(&image.id) else {
            return Ok(None);
        };
        let mut gts = Vec::new();
        let mut annotation_ids = Vec::new();
        for ann in anns {
            if ann.iscrowd != 0 && !opts.include_crowd {
                warnings.skipped_crowd += 1;
                continue;
            }
            if let Some(gt) = build_ground_truth(image, ann, warnings)? {
                gts.push(gt);
                annotation_ids.push(ann.id);
            }
        }
        if gts.is_empty() {
            return Ok(None);
        }
        Ok(Some(Scene {
            image_id: image.id,
            width: image.width,
            height: image.height,
            gts,
            annotation_ids,
        }))
    }

    /// Builds every scene, in image-id order.
    pub fn scenes(&self, opts: &LoadOptions) -> Result<(Vec<Scene>, LoadWarnings)> {
        let mut warnings = LoadWarnings::default();
        let mut scenes = Vec::new();
        for i in 0..self.images.len() {
            if let Some(scene) = self.build_scene(i, opts, &mut warnings)? {
                scenes.push(scene);
            }
        }
        Ok((scenes, warnings))
    }
}

/// Reads a COCO-instances file into scenes.
pub fn load_annotations(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
) -> Result<(Vec<Scene>, LoadWarnings)> {
    CocoInstances::from_path(path)?.scenes(opts)
}

fn build_ground_truth(
    image: &ImageInfo,
    ann: &Annotation,
    warnings: &mut LoadWarnings,
) -> Result<Option<GroundTruth>> {
    let (w, h) = (image.width, image.height);
    let invalid = |msg: String| Error::InvalidAnnotation(format!("annotation {}: {msg}", ann.id));
    if w == 0 || h == 0 {
        return Err(invalid(format!("image {} has zero size", image.id)));
    }

    let [x, y, bw, bh] = ann.bbox;
    let bbox = BBox::from_xywh(x, y, bw, bh)
        .ok()
        .and_then(|b| b.clamp_to(w as f64, h as f64))
        .filter(|b| discretize(b, h, w).is_some());
    let Some(bbox) = bbox else {
        log::warn!(
            "annotation {}: degenerate bbox {:?}, skipped",
            ann.id,
            ann.bbox
        );
        warnings.skipped_degenerate_boxes += 1;
        return Ok(None);
    };

    let mask = match &ann.segmentation {
        Segmentation::Polygons(parts) => {
            let mut mask = BinaryMask::zeros(h, w)?;
            for part in parts {
                if part.len() < 6 || part.len() % 2 != 0 {
                    log::warn!(
                        "annotation {}: polygon with {} coordinates, skipped",
                        ann.id,
                        part.len()
                    );
                    warnings.skipped_polygon_parts += 1;
                    continue;
                }
                let vertices: Vec<(f64, f64)> =
                    part.chunks_exact(2).map(|p| (p[0], p[1])).collect();
                mask.union_with(
                    &rasterize_polygon(&vertices, h, w).map_err(|e| invalid(e.to_string()))?,
                )?;
            }
            mask
        }
        Segmentation::Rle(rle) => {
            let counts = match &rle.counts {
                RleCounts::Uncompressed(counts) => counts,
                RleCounts::Compressed(_) => {
                    return Err(Error::UnsupportedFormat {
                        annotation_id: ann.id,
                        format: "compressed RLE",
                    })
                }
            };
            if rle.size != [h, w] {
                return Err(invalid(format!(
                    "RLE size {:?} does not match image {}x{}",
                    rle.size, h, w
                )));
            }
            decode_rle(counts, h, w).map_err(|e| invalid(e.to_string()))?
        }
    };

    match mask.extent() {
        None => {
            log::warn!("annotation {}: empty mask", ann.id);
            warnings.empty_masks += 1;
        }
        Some(extent) => {
            let pb = discretize(&bbox, h, w).expect("checked above");
            let inter = extent.intersection_area(&pb);
            let union = extent.area() + pb.area() - inter;
            if (inter as f64) < 0.9 * union as f64 {
                log::warn!("annotation {}: mask extent disagrees with bbox", ann.id);
                warnings.extent_mismatch += 1;
            }
        }
    }

    GroundTruth::new(bbox, mask, ann.category_id).map(Some)
}
