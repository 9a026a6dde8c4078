use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::codec::jpeg_round_trip;
use crate::raster::{BinaryMask, RasterImage};

/// A robustness degradation with its intensity parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum DegradeOp {
    /// JPEG re-encode at quality 1..=100.
    Jpeg { quality: u8 },
    /// Additive i.i.d. Gaussian noise, sigma in 8-bit intensity units.
    GaussianNoise { sigma: f64, seed: u64 },
    /// Separable Gaussian blur with an odd kernel size and sigma = kernel / 6.
    GaussianBlur { kernel: u32 },
    /// Bilinear rescale by `rate`; output sides are `round(side * rate)`, at least 1.
    Resize { rate: f64 },
}

impl DegradeOp {
    pub fn validate(&self) -> Result<(), EvalError> {
        match *self {
            DegradeOp::Jpeg { quality } if !(1..=100).contains(&quality) => Err(EvalError::InvalidParam(format!(
                "jpeg quality {quality} outside 1..=100"
            ))),
            DegradeOp::GaussianNoise { sigma, .. } if !(sigma >= 0.0 && sigma.is_finite()) => Err(
                EvalError::InvalidParam(format!("noise sigma {sigma} must be finite and >= 0")),
            ),
            DegradeOp::GaussianBlur { kernel } if kernel == 0 || kernel % 2 == 0 => Err(EvalError::InvalidParam(
                format!("blur kernel {kernel} must be odd and >= 1"),
            )),
            DegradeOp::Resize { rate } if !(rate > 0.0 && rate.is_finite()) => Err(EvalError::InvalidParam(format!(
                "resize rate {rate} must be finite and > 0"
            ))),
            _ => Ok(()),
        }
    }

    /// Short name used for output directories, e.g. `jpeg`, `noise`.
    pub fn name(&self) -> &'static str {
        match self {
            DegradeOp::Jpeg { .. } => "jpeg",
            DegradeOp::GaussianNoise { .. } => "noise",
            DegradeOp::GaussianBlur { .. } => "blur",
            DegradeOp::Resize { .. } => "resize",
        }
    }

    /// Output dimensions for an input of `width x height`.
    pub fn output_dimensions(&self, width: u32, height: u32) -> (u32, u32) {
        match *self {
            DegradeOp::Resize { rate } => (scaled_side(width, rate), scaled_side(height, rate)),
            _ => (width, height),
        }
    }
}

fn scaled_side(side: u32, rate: f64) -> u32 {
    ((side as f64 * rate).round().max(1.0)).min(u32::MAX as f64) as u32
}

pub fn degrade(img: &RasterImage, op: &DegradeOp) -> Result<RasterImage, EvalError> {
    op.validate()?;
    match *op {
        DegradeOp::Jpeg { quality } => Ok(jpeg_round_trip(img, quality)?),
        DegradeOp::GaussianNoise { sigma, seed } => Ok(add_noise(img, sigma, seed)),
        DegradeOp::GaussianBlur { kernel } => Ok(gaussian_blur(img, kernel)),
        DegradeOp::Resize { .. } => {
            let (w, h) = op.output_dimensions(img.width(), img.height());
            Ok(resize_bilinear(img, w, h))
        }
    }
}

fn add_noise(img: &RasterImage, sigma: f64, seed: u64) -> RasterImage {
    if sigma == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    let data = img
        .data()
        .iter()
        .map(|&v| (v as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
        .collect();
    RasterImage::new(img.width(), img.height(), data).expect("same dimensions")
}

fn gaussian_taps(kernel: u32) -> Vec<f64> {
    let sigma = kernel as f64 / 6.0;
    let r = (kernel / 2) as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|t| t / sum).collect()
}

fn gaussian_blur(img: &RasterImage, kernel: u32) -> RasterImage {
    if kernel == 1 {
        return img.clone();
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    let taps = gaussian_taps(kernel);
    let r = (taps.len() / 2) as i64;
    let src: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    let at = |x: i64, y: i64, c: usize| ((y * w + x) * 3) as usize + c;

    let mut horiz = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                horiz[at(x, y, c)] = taps
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t * src[at((x + k as i64 - r).clamp(0, w - 1), y, c)])
                    .sum();
            }
        }
    }
    let mut data = vec![0u8; src.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let v: f64 = taps
                    .iter()
                    .enumerate()
                    .map(|(k, t)| t * horiz[at(x, (y + k as i64 - r).clamp(0, h - 1), c)])
                    .sum();
                data[at(x, y, c)] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RasterImage::new(img.width(), img.height(), data).expect("same dimensions")
}

/// Source sample position and weights along one axis (half-pixel centres).
fn axis_samples(src: u32, dst: u32) -> Vec<(usize, usize, f64)> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(src as usize - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

/// Bilinear resampling to `width x height` with half-pixel centre alignment.
pub fn resize_bilinear(img: &RasterImage, width: u32, height: u32) -> RasterImage {
    if img.dimensions() == (width, height) {
        return img.clone();
    }
    let xs = axis_samples(img.width(), width);
    let ys = axis_samples(img.height(), height);
    let mut data = Vec::with_capacity((width as usize) * (height as usize) * 3);
    for &(y0, y1, fy) in &ys {
        for &(x0, x1, fx) in &xs {
            let p = |x: usize, y: usize| img.pixel(x as u32, y as u32);
            let (a, b, c, d) = (p(x0, y0), p(x1, y0), p(x0, y1), p(x1, y1));
            for ch in 0..3 {
                let top = a[ch] as f64 * (1.0 - fx) + b[ch] as f64 * fx;
                let bottom = c[ch] as f64 * (1.0 - fx) + d[ch] as f64 * fx;
                data.push((top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    RasterImage::new(width, height, data).expect("buffer sized from dimensions")
}

/// Nearest-neighbour resampling of a mask, used to keep ground truth aligned
/// with resized images.
pub fn resize_mask_nearest(mask: &BinaryMask, width: u32, height: u32) -> BinaryMask {
    if mask.dimensions() == (width, height) {
        return mask.clone();
    }
    let (sw, sh) = (mask.width() as u64, mask.height() as u64);
    let mut out = BinaryMask::empty(width, height).expect("positive dimensions");
    for y in 0..height {
        let sy = ((2 * y as u64 + 1) * sh / (2 * height as u64)).min(sh - 1) as u32;
        for x in 0..width {
            let sx = ((2 * x as u64 + 1) * sw / (2 * width as u64)).min(sw - 1) as u32;
            out.set(x, y, mask.get(sx, sy));
        }
    }
    out
}
