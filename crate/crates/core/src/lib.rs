//! Mask-aware IoU (maIoU) and the anchor-assignment machinery around it.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: continuous boxes and the box-only IoU variants.
//! * [`raster`]: binary masks, polygon/RLE decoding, integral images and
//!   pixel-domain box discretization.
//! * [`maiou`]: the MOB ratio, maIoU (integral-image fast path and a
//!   brute-force pixel-counting oracle) and pairwise proximity matrices.
//! * [`anchors`]: FPN anchor grids.
//! * [`assigner`]: fixed-threshold and ATSS assigners.
//! * [`dataset`]: COCO-instances ingestion.
//! * [`analysis`]: histograms, assigner comparison and the timing benchmark.

pub mod analysis;
pub mod anchors;
pub mod assigner;
pub mod dataset;
mod error;
pub mod geometry;
pub mod maiou;
pub mod raster;

pub use error::{Error, Result};
pub use geometry::BBox;
pub use maiou::{GroundTruth, ProximityMeasure};
