use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box ({x1}, {y1}, {x2}, {y2}): {reason}")]
    InvalidBox {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        reason: &'static str,
    },

    #[error("invalid annotation: {0}")]
    InvalidAnnotation(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("invalid pixel box ({x1}, {y1}, {x2}, {y2}) on a {height}x{width} grid")]
    InvalidPixelBox {
        x1: u32,
        y1: u32,
        x2: u32,
        y2: u32,
        height: u32,
        width: u32,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed annotation file at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("annotation {annotation_id}: unsupported segmentation format ({format})")]
    UnsupportedFormat {
        annotation_id: u64,
        format: &'static str,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("length mismatch: {left} vs {right} anchors")]
    LengthMismatch { left: usize, right: usize },
}
