//! Integer rectangle geometry.
//!
//! Boxes use the exclusive right/bottom convention: a box `(x1, y1, x2, y2)`
//! covers columns `x1..x2` and rows `y1..y2`, so its area is
//! `(x2 - x1) * (y2 - y1)`. Every area and intersection is computed in exact
//! integer arithmetic; IoU is a single division of two exact areas.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("DegenerateBox: ({x1}, {y1}, {x2}, {y2}) has no area")]
    DegenerateBox { x1: i64, y1: i64, x2: i64, y2: i64 },
    #[error("InvalidBox: ({x1}, {y1}, {x2}, {y2}) has negative or out-of-range coordinates")]
    OutOfRange { x1: i64, y1: i64, x2: i64, y2: i64 },
}

/// Axis-aligned pixel rectangle with `x1 < x2`, `y1 < y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundingBox {
    x1: u32,
    y1: u32,
    x2: u32,
    y2: u32,
}

impl BoundingBox {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Self, GeometryError> {
        Self::from_coords([x1 as i64, y1 as i64, x2 as i64, y2 as i64])
    }

    /// Validates raw signed coordinates without clipping them.
    pub fn from_coords(c: [i64; 4]) -> Result<Self, GeometryError> {
        let [x1, y1, x2, y2] = c;
        let max = u32::MAX as i64;
        if c.iter().any(|&v| v < 0 || v > max) {
            return Err(GeometryError::OutOfRange { x1, y1, x2, y2 });
        }
        if x1 >= x2 || y1 >= y2 {
            return Err(GeometryError::DegenerateBox { x1, y1, x2, y2 });
        }
        Ok(Self {
            x1: x1 as u32,
            y1: y1 as u32,
            x2: x2 as u32,
            y2: y2 as u32,
        })
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }
    pub fn y1(&self) -> u32 {
        self.y1
    }
    pub fn x2(&self) -> u32 {
        self.x2
    }
    pub fn y2(&self) -> u32 {
        self.y2
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn coords(&self) -> [u32; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    /// Area shared with `other`; zero for disjoint or edge-touching boxes.
    pub fn intersection_area(&self, other: &BoundingBox) -> u64 {
        let w = self.x2.min(other.x2).saturating_sub(self.x1.max(other.x1));
        let h = self.y2.min(other.y2).saturating_sub(self.y1.max(other.y1));
        w as u64 * h as u64
    }

    /// Smallest box containing both.
    pub fn union_rect(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }

    pub fn contains_pixel(&self, x: u32, y: u32) -> bool {
        x >= self.x1 && x < self.x2 && y >= self.y1 && y < self.y2
    }
}

impl fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.x1, self.y1, self.x2, self.y2)
    }
}

impl Serialize for BoundingBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let c = <[i64; 4]>::deserialize(d)?;
        BoundingBox::from_coords(c).map_err(serde::de::Error::custom)
    }
}

/// Intersection over union of two boxes, in `[0, 1]`.
pub fn box_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

/// Clips raw coordinates into `[0, width] x [0, height]`.
pub fn clamp_box(coords: [i64; 4], width: u32, height: u32) -> Result<BoundingBox, GeometryError> {
    let [x1, y1, x2, y2] = coords;
    let (w, h) = (width as i64, height as i64);
    let clipped = [x1.clamp(0, w), y1.clamp(0, h), x2.clamp(0, w), y2.clamp(0, h)];
    if clipped[0] >= clipped[2] || clipped[1] >= clipped[3] {
        return Err(GeometryError::DegenerateBox { x1, y1, x2, y2 });
    }
    BoundingBox::from_coords(clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x1: u32, y1: u32, x2: u32, y2: u32) -> BoundingBox {
        BoundingBox::new(x1, y1, x2, y2).unwrap()
    }

    /// Counts cells of a rasterized grid covered by each box.
    fn raster_iou(a: &BoundingBox, b: &BoundingBox, side: u32) -> (u64, u64) {
        let (mut inter, mut union) = (0, 0);
        for y in 0..side {
            for x in 0..side {
                let ia = a.contains_pixel(x, y);
                let ib = b.contains_pixel(x, y);
                inter += (ia && ib) as u64;
                union += (ia || ib) as u64;
            }
        }
        (inter, union)
    }

    #[test]
    fn iou_examples() {
        assert_eq!(box_iou(&bb(0, 0, 10, 10), &bb(0, 0, 10, 10)), 1.0);
        assert_eq!(box_iou(&bb(0, 0, 10, 10), &bb(20, 20, 30, 30)), 0.0);
        // 20x10 raster: 50 shared cells out of 150 covered.
        let (a, b) = (bb(0, 0, 10, 10), bb(5, 0, 15, 10));
        assert_eq!(raster_iou(&a, &b, 20), (50, 150));
        assert_eq!(box_iou(&a, &b), 50.0 / 150.0);
        assert!((box_iou(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn touching_edges_have_zero_iou() {
        assert_eq!(box_iou(&bb(0, 0, 10, 10), &bb(10, 0, 20, 10)), 0.0);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_box([-5, -5, 10, 10], 100, 100).unwrap(), bb(0, 0, 10, 10));
        assert_eq!(clamp_box([10, 10, 20, 20], 100, 100).unwrap(), bb(10, 10, 20, 20));
        assert!(matches!(
            clamp_box([150, 150, 200, 200], 100, 100),
            Err(GeometryError::DegenerateBox { .. })
        ));
    }

    #[test]
    fn constructor_rejects_degenerate_boxes() {
        assert!(BoundingBox::new(5, 0, 5, 10).is_err());
        assert!(BoundingBox::from_coords([-1, 0, 5, 5]).is_err());
    }

    #[test]
    fn serde_as_array() {
        let b = bb(1, 2, 3, 4);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1,2,3,4]");
        assert_eq!(serde_json::from_str::<BoundingBox>("[1,2,3,4]").unwrap(), b);
        assert!(serde_json::from_str::<BoundingBox>("[3,2,1,4]").is_err());
    }

    #[test]
    fn iou_matches_raster_oracle_exhaustively_on_small_range() {
        // All boxes with coordinates in [0, 8] against a fixed probe set, plus
        // the proptest below for the full [0, 32] range.
        let mut boxes = Vec::new();
        for x1 in 0..8 {
            for x2 in x1 + 1..=8 {
                for y1 in (0..8).step_by(3) {
                    for y2 in (y1 + 1..=8).step_by(2) {
                        boxes.push(bb(x1, y1, x2, y2));
                    }
                }
            }
        }
        for a in &boxes {
            for b in boxes.iter().step_by(7) {
                let (i, u) = raster_iou(a, b, 8);
                assert_eq!(box_iou(a, b), i as f64 / u as f64);
            }
        }
    }

    fn arb_box(max: u32) -> impl Strategy<Value = BoundingBox> {
        (0..max, 0..max, 1..=max, 1..=max)
            .prop_filter_map("degenerate", |(x1, y1, x2, y2)| BoundingBox::new(x1, y1, x2, y2).ok())
    }

    proptest! {
        #[test]
        fn iou_agrees_with_raster_oracle(a in arb_box(32), b in arb_box(32)) {
            let (i, u) = raster_iou(&a, &b, 32);
            prop_assert_eq!(box_iou(&a, &b), i as f64 / u as f64);
        }

        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(32), b in arb_box(32)) {
            let v = box_iou(&a, &b);
            prop_assert_eq!(v, box_iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v == 0.0, a.intersection_area(&b) == 0);
            prop_assert_eq!(box_iou(&a, &a), 1.0);
        }
    }
}
