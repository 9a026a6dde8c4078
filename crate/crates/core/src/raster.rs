//! Pixel containers shared by the tools, the degradation suite and the metrics.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};

#[derive(Debug, thiserror::Error)]
pub enum RasterError {
    #[error("invalid dimensions {width}x{height} for a buffer of {len} samples")]
    InvalidDimensions { width: u32, height: u32, len: usize },
    #[error("map value {0} outside [0, 1]")]
    ValueOutOfRange(f64),
    #[error("ShapeMismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("image i/o on {path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },
}

fn checked_len(width: u32, height: u32, channels: usize) -> Option<usize> {
    if width == 0 || height == 0 {
        return None;
    }
    (width as usize).checked_mul(height as usize)?.checked_mul(channels)
}

/// 8-bit RGB image, row-major, interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl RasterImage {
    pub const CHANNELS: usize = 3;

    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self, RasterError> {
        match checked_len(width, height, Self::CHANNELS) {
            Some(n) if n == data.len() => Ok(Self { width, height, data }),
            _ => Err(RasterError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            }),
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Result<Self, RasterError> {
        let n = checked_len(width, height, 1).ok_or(RasterError::InvalidDimensions { width, height, len: 0 })?;
        Ok(Self {
            width,
            height,
            data: rgb.iter().copied().cycle().take(n * 3).collect(),
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self, RasterError> {
        checked_len(width, height, 3).ok_or(RasterError::InvalidDimensions { width, height, len: 0 })?;
        let mut data = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn to_rgb_image(&self) -> RgbImage {
        ImageBuffer::<Rgb<u8>, _>::from_raw(self.width, self.height, self.data.clone())
            .expect("length checked at construction")
    }

    pub fn from_rgb_image(img: RgbImage) -> Self {
        let (width, height) = img.dimensions();
        Self {
            width,
            height,
            data: img.into_raw(),
        }
    }

    /// Decodes any supported format and converts it to RGB.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| RasterError::Image {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::from_rgb_image(img.to_rgb8()))
    }

    /// Writes a PNG (or any format implied by the extension).
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        let path = path.as_ref();
        self.to_rgb_image().save(path).map_err(|source| RasterError::Image {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Single-channel map with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayMap {
    width: u32,
    height: u32,
    data: Vec<f64>,
}

impl GrayMap {
    pub fn new(width: u32, height: u32, data: Vec<f64>) -> Result<Self, RasterError> {
        match checked_len(width, height, 1) {
            Some(n) if n == data.len() => {}
            _ => {
                return Err(RasterError::InvalidDimensions {
                    width,
                    height,
                    len: data.len(),
                })
            }
        }
        if let Some(&v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(RasterError::ValueOutOfRange(v));
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: u32, height: u32) -> Result<Self, RasterError> {
        let n = checked_len(width, height, 1).ok_or(RasterError::InvalidDimensions { width, height, len: 0 })?;
        Ok(Self {
            width,
            height,
            data: vec![0.0; n],
        })
    }

    /// Builds a map from unchecked values, clipping each into `[0, 1]`
    /// (NaN becomes 0).
    pub(crate) fn from_clipped(width: u32, height: u32, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width as usize * height as usize);
        let data = data
            .into_iter()
            .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
            .collect();
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Quantizes to 8 bits as `round(v * 255)`.
    pub fn to_gray_image(&self) -> GrayImage {
        let bytes = self.data.iter().map(|v| (v * 255.0).round() as u8).collect();
        ImageBuffer::<Luma<u8>, _>::from_raw(self.width, self.height, bytes).expect("length checked at construction")
    }

    pub fn from_gray_image(img: &GrayImage) -> Self {
        let (width, height) = img.dimensions();
        let data = img.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
        Self { width, height, data }
    }

    /// Loads any image as luminance and rescales it to `[0, 1]`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| RasterError::Image {
            path: path.display().to_string(),
            source,
        })?;
        Ok(Self::from_gray_image(&img.to_luma8()))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        let path = path.as_ref();
        self.to_gray_image()
            .save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| RasterError::Image {
                path: path.display().to_string(),
                source,
            })
    }
}

/// Per-pixel boolean mask; `true` marks tampered pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: u32, height: u32, data: Vec<bool>) -> Result<Self, RasterError> {
        match checked_len(width, height, 1) {
            Some(n) if n == data.len() => Ok(Self { width, height, data }),
            _ => Err(RasterError::InvalidDimensions {
                width,
                height,
                len: data.len(),
            }),
        }
    }

    pub fn empty(width: u32, height: u32) -> Result<Self, RasterError> {
        let n = checked_len(width, height, 1).ok_or(RasterError::InvalidDimensions { width, height, len: 0 })?;
        Ok(Self {
            width,
            height,
            data: vec![false; n],
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn any(&self) -> bool {
        self.data.iter().any(|&v| v)
    }

    /// Writes 0/255 grayscale PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        let path = path.as_ref();
        let bytes = self.data.iter().map(|&v| if v { 255u8 } else { 0 }).collect();
        let img = GrayImage::from_raw(self.width, self.height, bytes).expect("length checked at construction");
        img.save_with_format(path, image::ImageFormat::Png)
            .map_err(|source| RasterError::Image {
                path: path.display().to_string(),
                source,
            })
    }

    /// Loads a mask image; any pixel with luminance above half range is set.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        let map = GrayMap::load(path)?;
        let data = map.data().iter().map(|&v| v > 0.5).collect();
        Ok(Self {
            width: map.width(),
            height: map.height(),
            data,
        })
    }
}
