//! Continuous-domain boxes and the box-only IoU variants.
//!
//! Coordinates are in pixels with the origin at the top-left corner, `x`
//! along columns and `y` along rows. Areas are plain `(x2 - x1) * (y2 - y1)`
//! with no `+1` convention.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An axis-aligned box with strictly positive width and height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BBox {
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidBox {
            x1,
            y1,
            x2,
            y2,
            reason,
        };
        if ![x1, y1, x2, y2].iter().all(|v| v.is_finite()) {
            return Err(invalid("non-finite coordinate"));
        }
        if x2 <= x1 || y2 <= y1 {
            return Err(invalid("width and height must be positive"));
        }
        Ok(Self { x1, y1, x2, y2 })
    }

    /// Builds a box from COCO `[x, y, w, h]`.
    pub fn from_xywh(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(x, y, x + w, y + h)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    #[inline]
    pub fn x1(&self) -> f64 {
        self.x1
    }

    #[inline]
    pub fn y1(&self) -> f64 {
        self.y1
    }

    #[inline]
    pub fn x2(&self) -> f64 {
        self.x2
    }

    #[inline]
    pub fn y2(&self) -> f64 {
        self.y2
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    #[inline]
    pub fn center(&self) -> (f64, f64) {
        ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)
    }

    /// Strict interiority: a point on the boundary is not contained.
    pub fn contains_strict(&self, x: f64, y: f64) -> bool {
        x > self.x1 && x < self.x2 && y > self.y1 && y < self.y2
    }

    /// Area of the overlap with `other`; zero when disjoint or touching.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x2.min(other.x2) - self.x1.max(other.x1);
        let h = self.y2.min(other.y2) - self.y1.max(other.y1);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Minimum box enclosing both `self` and `other`.
    pub fn enclosing(&self, other: &BBox) -> BBox {
        BBox {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<BBox> {
        BBox::new(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)
    }

    /// Scales about the origin.
    pub fn scale(&self, factor: f64) -> Result<BBox> {
        BBox::new(
            self.x1 * factor,
            self.y1 * factor,
            self.x2 * factor,
            self.y2 * factor,
        )
    }

    /// Clamps the box to `[0, width] x [0, height]`, returning `None` if
    /// nothing with positive area remains.
    pub fn clamp_to(&self, width: f64, height: f64) -> Option<BBox> {
        BBox::new(
            self.x1.clamp(0.0, width),
            self.y1.clamp(0.0, height),
            self.x2.clamp(0.0, width),
            self.y2.clamp(0.0, height),
        )
        .ok()
    }
}

impl<'de> Deserialize<'de> for BBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            x1: f64,
            y1: f64,
            x2: f64,
            y2: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        BBox::new(raw.x1, raw.y1, raw.x2, raw.y2).map_err(serde::de::Error::custom)
    }
}

pub fn area(b: &BBox) -> f64 {
    b.area()
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    inter / union
}

/// Generalized IoU: `iou - (|C| - |a ∪ b|) / |C|` with `C` the minimum
/// enclosing box.
pub fn giou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    let union = a.area() + b.area() - inter;
    let hull = a.enclosing(b).area();
    inter / union - (hull - union) / hull
}

/// Distance IoU: `iou - ρ² / c²` with `ρ` the distance between centers and
/// `c` the diagonal of the minimum enclosing box.
pub fn diou(a: &BBox, b: &BBox) -> f64 {
    let hull = a.enclosing(b);
    let diag_sq = hull.width().powi(2) + hull.height().powi(2);
    iou(a, b) - center_distance_sq(a, b) / diag_sq
}

pub fn center_distance(a: &BBox, b: &BBox) -> f64 {
    center_distance_sq(a, b).sqrt()
}

pub(crate) fn center_distance_sq(a: &BBox, b: &BBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).powi(2) + (ay - by).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x1: f64, y1: f64, x2: f64, y2: f64) -> BBox {
        BBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn rejects_degenerate_and_non_finite() {
        assert!(BBox::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, 1.0, -1.0).is_err());
        assert!(BBox::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn area_examples() {
        assert_eq!(area(&b(0.0, 0.0, 10.0, 10.0)), 100.0);
        assert_eq!(area(&b(0.0, 0.0, 1.0, 1.0)), 1.0);
        assert_eq!(area(&b(2.5, 0.0, 7.5, 4.0)), 20.0);
    }

    #[test]
    fn iou_examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&b(0.0, 0.0, 1.0, 1.0), &b(5.0, 5.0, 6.0, 6.0)), 0.0);
        let v = iou(&a, &b(5.0, 0.0, 15.0, 10.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn giou_examples() {
        let a = b(0.0, 0.0, 3.0, 7.0);
        assert_eq!(giou(&a, &a), 1.0);
        let v = giou(&b(0.0, 0.0, 1.0, 1.0), &b(2.0, 0.0, 3.0, 1.0));
        assert!((v + 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(giou(&b(0.0, 0.0, 1.0, 1.0), &b(1.0, 0.0, 2.0, 1.0)), 0.0);
    }

    #[test]
    fn diou_examples() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        assert_eq!(diou(&a, &a), 1.0);
        let v = diou(&a, &b(4.0, 0.0, 6.0, 2.0));
        assert!((v + 0.4).abs() < 1e-12);
        let v = diou(&b(0.0, 0.0, 4.0, 4.0), &b(1.0, 1.0, 3.0, 3.0));
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn center_distance_examples() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        assert_eq!(center_distance(&a, &a), 0.0);
        assert_eq!(center_distance(&a, &b(4.0, 0.0, 6.0, 2.0)), 4.0);
        assert_eq!(center_distance(&a, &b(0.0, 4.0, 2.0, 6.0)), 4.0);
    }

    #[test]
    fn strict_containment_excludes_boundary() {
        let a = b(0.0, 0.0, 2.0, 2.0);
        assert!(a.contains_strict(1.0, 1.0));
        assert!(!a.contains_strict(0.0, 1.0));
        assert!(!a.contains_strict(2.0, 2.0));
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (-50.0..50.0f64, -50.0..50.0f64, 0.1..40.0f64, 0.1..40.0f64)
            .prop_map(|(x, y, w, h)| BBox::new(x, y, x + w, y + h).unwrap())
    }

    proptest! {
        #[test]
        fn symmetric(a in arb_box(), c in arb_box()) {
            prop_assert_eq!(iou(&a, &c), iou(&c, &a));
            prop_assert!((giou(&a, &c) - giou(&c, &a)).abs() < 1e-12);
            prop_assert!((diou(&a, &c) - diou(&c, &a)).abs() < 1e-12);
            prop_assert_eq!(center_distance(&a, &c), center_distance(&c, &a));
        }

        #[test]
        fn variants_bounded_by_iou(a in arb_box(), c in arb_box()) {
            let v = iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(giou(&a, &c) <= v + 1e-12);
            prop_assert!(diou(&a, &c) <= v + 1e-12);
            prop_assert!(giou(&a, &c) > -1.0);
            prop_assert!(diou(&a, &c) > -1.0);
        }

        #[test]
        fn translation_invariant(a in arb_box(), c in arb_box(), dx in -100.0..100.0f64, dy in -100.0..100.0f64) {
            let (ta, tc) = (a.translate(dx, dy).unwrap(), c.translate(dx, dy).unwrap());
            prop_assert!((iou(&a, &c) - iou(&ta, &tc)).abs() < 1e-9);
            prop_assert!((giou(&a, &c) - giou(&ta, &tc)).abs() < 1e-9);
            prop_assert!((diou(&a, &c) - diou(&ta, &tc)).abs() < 1e-9);
            prop_assert!((center_distance(&a, &c) - center_distance(&ta, &tc)).abs() < 1e-9);
        }

        #[test]
        fn scale_behaviour(a in arb_box(), c in arb_box(), s in 0.1..10.0f64) {
            let (sa, sc) = (a.scale(s).unwrap(), c.scale(s).unwrap());
            prop_assert!((iou(&a, &c) - iou(&sa, &sc)).abs() < 1e-9);
            prop_assert!((giou(&a, &c) - giou(&sa, &sc)).abs() < 1e-9);
            prop_assert!((diou(&a, &c) - diou(&sa, &sc)).abs() < 1e-9);
            prop_assert!((center_distance(&sa, &sc) - s * center_distance(&a, &c)).abs() < 1e-8);
        }

        #[test]
        fn unit_iou_only_for_identical(a in arb_box(), c in arb_box()) {
            prop_assert_eq!(iou(&a, &c) == 1.0, a == c);
        }

        #[test]
        fn equality_cases(a in arb_box(), w in 0.1..20.0f64, h in 0.1..20.0f64) {
            // concentric: diou == iou
            let (cx, cy) = a.center();
            let c = BBox::from_center(cx, cy, w, h).unwrap();
            prop_assert!((diou(&a, &c) - iou(&a, &c)).abs() < 1e-12);
            // nested: enclosing box is the union, giou == iou
            let inner = BBox::new(a.x1(), a.y1(), a.x1() + a.width() / 2.0, a.y2()).unwrap();
            prop_assert!((giou(&a, &inner) - iou(&a, &inner)).abs() < 1e-12);
        }
    }
}
