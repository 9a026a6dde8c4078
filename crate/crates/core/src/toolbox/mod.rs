//! Forensic toolbox: image-to-map operators plus the zoom-in crop.
//!
//! Every operator is a pure function of its input image and configuration.
//! Map-producing tools preserve the input dimensions and emit values in
//! `[0, 1]`.

mod ela;
mod fft;
mod residual;
mod zoom;

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

pub use ela::{ela, ElaConfig};
pub use fft::{dft2, fft_map, luminance, FftConfig, FftMode};
pub use residual::{median3x3, noise_residual};
pub use zoom::{zoom_in, DEFAULT_MIN_SIDE};

use crate::codec::CodecError;
use crate::geometry::{clamp_box, GeometryError};
use crate::raster::{GrayMap, RasterError, RasterImage};
use crate::{ToolId, UnknownTool};

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    UnknownTool(#[from] UnknownTool),
    #[error("ImageTooSmall: {width}x{height} is smaller than block size {block_size}")]
    ImageTooSmall { width: u32, height: u32, block_size: u32 },
    #[error("invalid tool configuration: {0}")]
    InvalidConfig(String),
    #[error("BadArguments: {0}")]
    BadArguments(String),
}

/// Output of one tool invocation.
#[derive(Debug, Clone, PartialEq)]
pub enum ToolImage {
    Map(GrayMap),
    Image(RasterImage),
}

impl ToolImage {
    pub fn dimensions(&self) -> (u32, u32) {
        match self {
            ToolImage::Map(m) => m.dimensions(),
            ToolImage::Image(i) => i.dimensions(),
        }
    }

    /// Maps are written as 8-bit grayscale, crops as RGB.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        match self {
            ToolImage::Map(m) => m.save_png(path),
            ToolImage::Image(i) => i.save(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToolOutput {
    pub tool: ToolId,
    pub output: ToolImage,
    /// The effective configuration, for reproducibility.
    pub params: serde_json::Value,
}

/// Per-tool arguments; fields irrelevant to the invoked tool must be unset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolArgs {
    pub ela: ElaConfig,
    pub fft: FftConfig,
    /// Raw zoom-in rectangle, clipped to the image before cropping.
    pub bbox: Option<[i64; 4]>,
    pub min_side: u32,
    /// Precomputed NPP map (grayscale image) to use instead of the built-in surrogate.
    pub external_map: Option<PathBuf>,
}

impl Default for ToolArgs {
    fn default() -> Self {
        Self {
            ela: ElaConfig::default(),
            fft: FftConfig::default(),
            bbox: None,
            min_side: DEFAULT_MIN_SIDE,
            external_map: None,
        }
    }
}

/// Runs `tool` on `img`.
pub fn run_tool(tool: ToolId, img: &RasterImage, args: &ToolArgs) -> Result<ToolOutput, ToolError> {
    if tool != ToolId::ZoomIn && args.bbox.is_some() {
        return Err(ToolError::BadArguments(format!("{tool} takes no bbox")));
    }
    if tool != ToolId::Npp && args.external_map.is_some() {
        return Err(ToolError::BadArguments(format!("{tool} takes no external map")));
    }
    let (output, params) = match tool {
        ToolId::Ela => {
            let map = ela(img, &args.ela)?;
            let params = json!({
                "tool": tool,
                "quality": args.ela.quality,
                "amplification": args.ela.amplification,
                "channel_reduction": "max",
            });
            (ToolImage::Map(map), params)
        }
        ToolId::Fft => {
            let map = fft_map(img, &args.fft)?;
            let mut params = serde_json::to_value(args.fft).expect("plain struct");
            params["tool"] = json!(tool);
            (ToolImage::Map(map), params)
        }
        ToolId::Npp => match &args.external_map {
            Some(path) => {
                let map = GrayMap::load(path)?;
                if map.dimensions() != img.dimensions() {
                    return Err(RasterError::ShapeMismatch {
                        expected: img.dimensions(),
                        actual: map.dimensions(),
                    }
                    .into());
                }
                let params = json!({
                    "tool": tool,
                    "method": "external",
                    "path": path.display().to_string(),
                });
                (ToolImage::Map(map), params)
            }
            None => {
                let params = json!({"tool": tool, "method": "median_residual", "window": 3});
                (ToolImage::Map(noise_residual(img)), params)
            }
        },
        ToolId::ZoomIn => {
            let raw = args
                .bbox
                .ok_or_else(|| ToolError::BadArguments("zoom_in requires a bbox".into()))?;
            let bbox = clamp_box(raw, img.width(), img.height())?;
            let crop = zoom_in(img, &bbox, args.min_side)?;
            let params = json!({
                "tool": tool,
                "bbox": bbox,
                "min_side": args.min_side,
                "output_size": [crop.width(), crop.height()],
            });
            (ToolImage::Image(crop), params)
        }
    };
    Ok(ToolOutput { tool, output, params })
}
