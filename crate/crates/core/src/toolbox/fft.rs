use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::ToolError;
use crate::raster::{GrayMap, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FftMode {
    /// Centered log-magnitude spectrum of the whole image.
    GlobalSpectrum,
    /// Blockwise energy above a radial frequency cutoff.
    HighFreqHeatmap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftConfig {
    pub mode: FftMode,
    /// Tile side for the heatmap, a power of two >= 8.
    pub block_size: u32,
    /// Fraction of the Nyquist radius below which energy is ignored, in (0, 1).
    pub radial_cutoff: f64,
}

impl Default for FftConfig {
    fn default() -> Self {
        Self {
            mode: FftMode::HighFreqHeatmap,
            block_size: 32,
            radial_cutoff: 0.25,
        }
    }
}

impl FftConfig {
    pub fn validate(&self) -> Result<(), ToolError> {
        if self.block_size < 8 || !self.block_size.is_power_of_two() {
            return Err(ToolError::InvalidConfig(format!(
                "FFT block size {} must be a power of two >= 8",
                self.block_size
            )));
        }
        if !(self.radial_cutoff > 0.0 && self.radial_cutoff < 1.0) {
            return Err(ToolError::InvalidConfig(format!(
                "FFT radial cutoff {} outside (0, 1)",
                self.radial_cutoff
            )));
        }
        Ok(())
    }
}

/// BT.601 luma of every pixel, in 8-bit units.
pub fn luminance(img: &RasterImage) -> Vec<f64> {
    img.data()
        .chunks_exact(3)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Unnormalized 2D DFT of a row-major `width x height` real signal.
///
/// Output bin `(u, v)` is stored at `v * width + u`.
pub fn dft2(signal: &[f64], width: usize, height: usize) -> Vec<Complex64> {
    assert_eq!(signal.len(), width * height, "signal length must be width * height");
    let mut planner = FftPlanner::<f64>::new();
    let mut data: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();

    let row_fft = planner.plan_fft_forward(width);
    row_fft.process(&mut data);

    let col_fft = planner.plan_fft_forward(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        col_fft.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
    data
}

/// Frequency-domain visualization of `img`, same dimensions as the input.
pub fn fft_map(img: &RasterImage, cfg: &FftConfig) -> Result<GrayMap, ToolError> {
    cfg.validate()?;
    match cfg.mode {
        FftMode::GlobalSpectrum => Ok(global_spectrum(img)),
        FftMode::HighFreqHeatmap => high_freq_heatmap(img, cfg),
    }
}

fn global_spectrum(img: &RasterImage) -> GrayMap {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let spectrum = dft2(&luminance(img), w, h);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let sy = (y + h - h / 2) % h;
        for x in 0..w {
            let sx = (x + w - w / 2) % w;
            out[y * w + x] = spectrum[sy * w + sx].norm().ln_1p();
        }
    }
    min_max_normalize(&mut out);
    GrayMap::from_clipped(img.width(), img.height(), out)
}

fn high_freq_heatmap(img: &RasterImage, cfg: &FftConfig) -> Result<GrayMap, ToolError> {
    let b = cfg.block_size;
    if img.width() < b || img.height() < b {
        return Err(ToolError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            block_size: b,
        });
    }
    let (w, h, b) = (img.width() as usize, img.height() as usize, b as usize);
    let (tiles_x, tiles_y) = (w / b, h / b);
    let luma = luminance(img);

    let half = (b / 2) as f64;
    let signed = |k: usize| if k <= b / 2 { k as f64 } else { k as f64 - b as f64 };
    let high: Vec<bool> = (0..b * b)
        .map(|i| {
            let (u, v) = (signed(i % b), signed(i / b));
            (u * u + v * v).sqrt() / half > cfg.radial_cutoff
        })
        .collect();

    let mut energy = vec![0.0; tiles_x * tiles_y];
    let mut tile = vec![0.0; b * b];
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            for y in 0..b {
                let row = (ty * b + y) * w + tx * b;
                tile[y * b..(y + 1) * b].copy_from_slice(&luma[row..row + b]);
            }
            // DC never contributes; removing it makes flat tiles exactly zero.
            let mean = tile.iter().sum::<f64>() / tile.len() as f64;
            tile.iter_mut().for_each(|v| *v -= mean);
            let spectrum = dft2(&tile, b, b);
            energy[ty * tiles_x + tx] = spectrum
                .iter()
                .zip(&high)
                .filter(|(_, &hi)| hi)
                .map(|(c, _)| c.norm_sqr())
                .sum();
        }
    }
    min_max_normalize(&mut energy);

    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let ty = (y / b).min(tiles_y - 1);
        for x in 0..w {
            let tx = (x / b).min(tiles_x - 1);
            out[y * w + x] = energy[ty * tiles_x + tx];
        }
    }
    Ok(GrayMap::from_clipped(img.width(), img.height(), out))
}

fn min_max_normalize(values: &mut [f64]) {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    if range.is_nan() || range <= 0.0 {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    values.iter_mut().for_each(|v| *v = (*v - lo) / range);
}
