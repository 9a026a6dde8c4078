use super::ToolError;
use crate::geometry::{clamp_box, BoundingBox};
use crate::raster::RasterImage;

pub const DEFAULT_MIN_SIDE: u32 = 224;

/// Crops `bbox` (clipped to the image) and enlarges it with nearest-neighbor
/// sampling until the shorter side reaches `min_side`.
pub fn zoom_in(img: &RasterImage, bbox: &BoundingBox, min_side: u32) -> Result<RasterImage, ToolError> {
    let c = bbox.coords().map(i64::from);
    let crop_box = clamp_box(c, img.width(), img.height())?;
    let (cw, ch) = (crop_box.width(), crop_box.height());
    let short = cw.min(ch);

    let (ow, oh) = if short < min_side {
        let scale = |side: u32| (side as u64 * min_side as u64).div_ceil(short as u64) as u32;
        (scale(cw), scale(ch))
    } else {
        (cw, ch)
    };

    RasterImage::from_fn(ow, oh, |x, y| {
        let sx = (x as u64 * cw as u64 / ow as u64) as u32;
        let sy = (y as u64 * ch as u64 / oh as u64) as u32;
        img.pixel(crop_box.x1() + sx, crop_box.y1() + sy)
    })
    .map_err(ToolError::from)
}
