//! Binary masks, their construction from polygons and uncompressed RLE, the
//! integral image and pixel-domain discretization of continuous boxes.

use serde::Serialize;

use crate::geometry::BBox;
use crate::{Error, Result};

/// An `height x width` binary mask stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: u32,
    width: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn zeros(height: u32, width: u32) -> Result<Self> {
        let len = checked_cells(height, width)?;
        Ok(Self {
            height,
            width,
            data: vec![false; len],
        })
    }

    pub fn from_vec(height: u32, width: u32, data: Vec<bool>) -> Result<Self> {
        let len = checked_cells(height, width)?;
        if data.len() != len {
            return Err(Error::InvalidMask(format!(
                "expected {len} cells for {height}x{width}, got {}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    /// Builds a mask by evaluating `f(row, col)` on every pixel.
    pub fn from_fn(height: u32, width: u32, mut f: impl FnMut(u32, u32) -> bool) -> Result<Self> {
        let len = checked_cells(height, width)?;
        let mut data = Vec::with_capacity(len);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn get(&self, row: u32, col: u32) -> bool {
        self.data[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let idx = row as usize * self.width as usize + col as usize;
        self.data[idx] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.data
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().filter(|&&v| v).count() as u64
    }

    /// In-place union with another mask of the same dimensions.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        if (self.height, self.width) != (other.height, other.width) {
            return Err(Error::InvalidMask(format!(
                "cannot union {}x{} with {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
        Ok(())
    }

    /// Tight bounding rectangle of the set pixels, `None` for an empty mask.
    pub fn extent(&self) -> Option<PixelBox> {
        let (mut x1, mut y1, mut x2, mut y2) = (u32::MAX, u32::MAX, 0, 0);
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(row, col) {
                    x1 = x1.min(col);
                    y1 = y1.min(row);
                    x2 = x2.max(col + 1);
                    y2 = y2.max(row + 1);
                }
            }
        }
        (x2 > 0).then_some(PixelBox { x1, y1, x2, y2 })
    }

    /// Replicates every pixel into an `s x s` block.
    pub fn upscale(&self, s: u32) -> Result<BinaryMask> {
        let (h, w) = (self.height.checked_mul(s), self.width.checked_mul(s));
        let (Some(h), Some(w)) = (h, w) else {
            return Err(Error::InvalidMask("upscaled mask too large".into()));
        };
        BinaryMask::from_fn(h, w, |r, c| self.get(r / s, c / s))
    }
}

fn checked_cells(height: u32, width: u32) -> Result<usize> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidMask(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    // Integral-image entries are u32; the total count must fit.
    let cells = height as u64 * width as u64;
    if cells > u32::MAX as u64 {
        return Err(Error::InvalidMask(format!(
            "{height}x{width} exceeds the supported pixel count"
        )));
    }
    Ok(cells as usize)
}

/// Summed-area table of a [`BinaryMask`]: `(height + 1) x (width + 1)`
/// entries where entry `(i, j)` counts mask pixels in rows `< i` and
/// columns `< j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    height: u32,
    width: u32,
    table: Vec<u32>,
}

impl IntegralImage {
    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn at(&self, row: u32, col: u32) -> u32 {
        self.table[row as usize * (self.width as usize + 1) + col as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.table
    }
}

/// Single pass over the mask: running row sum plus the entry above.
pub fn build_integral(mask: &BinaryMask) -> IntegralImage {
    let (h, w) = (mask.height as usize, mask.width as usize);
    let stride = w + 1;
    let mut table = vec![0u32; (h + 1) * stride];
    for row in 0..h {
        let src = &mask.data[row * w..(row + 1) * w];
        let (above, below) = table.split_at_mut((row + 1) * stride);
        let above = &above[row * stride..];
        let dst = &mut below[..stride];
        let mut running = 0u32;
        for col in 0..w {
            running += src[col] as u32;
            dst[col + 1] = above[col + 1] + running;
        }
    }
    IntegralImage {
        height: mask.height,
        width: mask.width,
        table,
    }
}

/// Total number of mask pixels: the bottom-right table entry.
pub fn mask_total(ii: &IntegralImage) -> u64 {
    ii.at(ii.height, ii.width) as u64
}

/// Mask pixels inside `pb` using four table lookups.
#[inline]
pub fn mask_in_box(ii: &IntegralImage, pb: &PixelBox) -> u64 {
    debug_assert!(pb.x2 <= ii.width && pb.y2 <= ii.height);
    // Sum in u64: the intermediate a + d may exceed u32.
    let a = ii.at(pb.y2, pb.x2) as u64;
    let d = ii.at(pb.y1, pb.x1) as u64;
    let b = ii.at(pb.y2, pb.x1) as u64;
    let c = ii.at(pb.y1, pb.x2) as u64;
    a + d - b - c
}

/// Half-open integer pixel rectangle `[x1, x2) x [y1, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PixelBox {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

impl PixelBox {
    /// Validates `0 <= x1 < x2 <= width` and `0 <= y1 < y2 <= height`.
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32, height: u32, width: u32) -> Result<Self> {
        if x1 < x2 && y1 < y2 && x2 <= width && y2 <= height {
            Ok(Self { x1, y1, x2, y2 })
        } else {
            Err(Error::InvalidPixelBox {
                x1,
                y1,
                x2,
                y2,
                height,
                width,
            })
        }
    }

    #[inline]
    pub fn x1(&self) -> u32 {
        self.x1
    }

    #[inline]
    pub fn y1(&self) -> u32 {
        self.y1
    }

    #[inline]
    pub fn x2(&self) -> u32 {
        self.x2
    }

    #[inline]
    pub fn y2(&self) -> u32 {
        self.y2
    }

    #[inline]
    pub fn area(&self) -> u64 {
        (self.x2 - self.x1) as u64 * (self.y2 - self.y1) as u64
    }

    #[inline]
    pub fn contains(&self, row: u32, col: u32) -> bool {
        col >= self.x1 && col < self.x2 && row >= self.y1 && row < self.y2
    }

    #[inline]
    pub fn intersection(&self, other: &PixelBox) -> Option<PixelBox> {
        let x1 = self.x1.max(other.x1);
        let y1 = self.y1.max(other.y1);
        let x2 = self.x2.min(other.x2);
        let y2 = self.y2.min(other.y2);
        (x1 < x2 && y1 < y2).then_some(PixelBox { x1, y1, x2, y2 })
    }

    #[inline]
    pub fn intersection_area(&self, other: &PixelBox) -> u64 {
        self.intersection(other).map_or(0, |b| b.area())
    }
}

/// Outer integer cover of `b` clipped to an `height x width` grid:
/// `floor` on the top-left corner, `ceil` on the bottom-right. Returns
/// `None` when nothing of the box lies on the grid.
pub fn discretize(b: &BBox, height: u32, width: u32) -> Option<PixelBox> {
    let clamp = |v: f64, hi: u32| v.clamp(0.0, hi as f64) as u32;
    let x1 = clamp(b.x1().floor(), width);
    let x2 = clamp(b.x2().ceil(), width);
    let y1 = clamp(b.y1().floor(), height);
    let y2 = clamp(b.y2().ceil(), height);
    (x1 < x2 && y1 < y2).then_some(PixelBox { x1, y1, x2, y2 })
}

/// Rasterizes a polygon with the even-odd rule: pixel `(row, col)` is set
/// iff its center `(col + 0.5, row + 0.5)` is inside.
pub fn rasterize_polygon(vertices: &[(f64, f64)], height: u32, width: u32) -> Result<BinaryMask> {
    if vertices.len() < 3 {
        return Err(Error::InvalidAnnotation(format!(
            "polygon needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    if vertices
        .iter()
        .any(|(x, y)| !x.is_finite() || !y.is_finite())
    {
        return Err(Error::InvalidAnnotation("non-finite polygon vertex".into()));
    }
    let mut mask = BinaryMask::zeros(height, width)?;
    let mut crossings = Vec::new();
    for row in 0..height {
        let y = row as f64 + 0.5;
        crossings.clear();
        for (i, &(px, py)) in vertices.iter().enumerate() {
            let (qx, qy) = vertices[(i + 1) % vertices.len()];
            if (py > y) != (qy > y) {
                crossings.push(px + (y - py) * (qx - px) / (qy - py));
            }
        }
        crossings.sort_by(f64::total_cmp);
        // The center x is inside iff an odd number of crossings lie to its
        // right, i.e. it sits in [c[2k], c[2k + 1]).
        for span in crossings.chunks_exact(2) {
            let first = (span[0] - 0.5).ceil().max(0.0);
            let last = (span[1] - 0.5).ceil().min(width as f64);
            if first >= last {
                continue;
            }
            for col in first as u32..last as u32 {
                mask.set(row, col, true);
            }
        }
    }
    Ok(mask)
}

/// Decodes COCO uncompressed RLE: column-major runs that alternate between
/// zeros and ones, starting with zeros.
pub fn decode_rle(counts: &[u64], height: u32, width: u32) -> Result<BinaryMask> {
    let mut mask = BinaryMask::zeros(height, width)?;
    let total: u64 = counts.iter().sum();
    let cells = height as u64 * width as u64;
    if total != cells {
        return Err(Error::InvalidAnnotation(format!(
            "RLE counts sum to {total}, expected {cells} for {height}x{width}"
        )));
    }
    let mut pos = 0u64;
    for (i, &run) in counts.iter().enumerate() {
        if i % 2 == 1 {
            for p in pos..pos + run {
                let col = (p / height as u64) as u32;
                let row = (p % height as u64) as u32;
                mask.set(row, col, true);
            }
        }
        pos += run;
    }
    Ok(mask)
}
