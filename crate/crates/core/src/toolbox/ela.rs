use serde::Serialize;

use super::ToolError;
use crate::codec::jpeg_round_trip;
use crate::raster::{GrayMap, RasterImage};

/// Error level analysis settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElaConfig {
    /// JPEG quality used for the recompression, 1..=100.
    pub quality: u8,
    /// Gain applied to the residual before clipping to `[0, 1]`.
    pub amplification: f64,
}

impl Default for ElaConfig {
    fn default() -> Self {
        Self {
            quality: 90,
            amplification: 10.0,
        }
    }
}

impl ElaConfig {
    pub fn validate(&self) -> Result<(), ToolError> {
        if !(1..=100).contains(&self.quality) {
            return Err(ToolError::InvalidConfig(format!(
                "ELA quality {} outside 1..=100",
                self.quality
            )));
        }
        if !(self.amplification > 0.0 && self.amplification.is_finite()) {
            return Err(ToolError::InvalidConfig(format!(
                "ELA amplification {} must be positive",
                self.amplification
            )));
        }
        Ok(())
    }
}

/// Recompresses `img` and maps the per-pixel residual.
///
/// Each output pixel is `min(1, amplification * max_c |img_c - jpeg(img)_c| / 255)`.
pub fn ela(img: &RasterImage, cfg: &ElaConfig) -> Result<GrayMap, ToolError> {
    cfg.validate()?;
    let recompressed = jpeg_round_trip(img, cfg.quality)?;
    let scale = cfg.amplification / 255.0;
    let data = img
        .data()
        .chunks_exact(3)
        .zip(recompressed.data().chunks_exact(3))
        .map(|(a, b)| {
            let diff = a.iter().zip(b).map(|(&p, &q)| p.abs_diff(q)).max().unwrap_or(0);
            diff as f64 * scale
        })
        .collect();
    Ok(GrayMap::from_clipped(img.width(), img.height(), data))
}
