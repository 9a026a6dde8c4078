use std::collections::VecDeque;

use crate::geometry::BoundingBox;
use crate::raster::BinaryMask;

/// Components smaller than this many pixels are dropped.
pub const MIN_COMPONENT_PIXELS: u64 = 100;

/// One 8-connected component of true pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub pixels: u64,
    pub bbox: BoundingBox,
}

/// A component survives iff it has at least [`MIN_COMPONENT_PIXELS`] pixels
/// and covers at least 0.05% of the image, compared in exact integers.
pub fn passes_size_filter(pixels: u64, width: u32, height: u32) -> bool {
    let area = u64::from(width) * u64::from(height);
    pixels >= MIN_COMPONENT_PIXELS && pixels * 10_000 >= 5 * area
}

/// All 8-connected components of the mask, in raster order of their first
/// pixel, without filtering.
pub fn label_components(mask: &BinaryMask) -> Vec<Component> {
    let (w, h) = mask.dimensions();
    let mut seen = vec![false; (w as usize) * (h as usize)];
    let idx = |x: u32, y: u32| (y as usize) * (w as usize) + x as usize;
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for sy in 0..h {
        for sx in 0..w {
            if !mask.get(sx, sy) || seen[idx(sx, sy)] {
                continue;
            }
            seen[idx(sx, sy)] = true;
            queue.push_back((sx, sy));
            let (mut x1, mut y1, mut x2, mut y2) = (sx, sy, sx, sy);
            let mut pixels = 0u64;
            while let Some((x, y)) = queue.pop_front() {
                pixels += 1;
                x1 = x1.min(x);
                y1 = y1.min(y);
                x2 = x2.max(x);
                y2 = y2.max(y);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        if mask.get(nx, ny) && !seen[idx(nx, ny)] {
                            seen[idx(nx, ny)] = true;
                            queue.push_back((nx, ny));
                        }
                    }
                }
            }
            let bbox = BoundingBox::new(x1, y1, x2 + 1, y2 + 1).expect("component spans at least one pixel");
            out.push(Component { pixels, bbox });
        }
    }
    out
}

/// Minimal enclosing box of every component that survives the size filter,
/// sorted by `(y1, x1)`.
pub fn mask_to_boxes(mask: &BinaryMask) -> Vec<BoundingBox> {
    let (w, h) = mask.dimensions();
    let mut boxes: Vec<BoundingBox> = label_components(mask)
        .into_iter()
        .filter(|c| passes_size_filter(c.pixels, w, h))
        .map(|c| c.bbox)
        .collect();
    boxes.sort_by_key(|b| (b.y1(), b.x1(), b.y2(), b.x2()));
    boxes
}
