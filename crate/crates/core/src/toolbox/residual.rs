//! Median-residual surrogate for a learned noise fingerprint.

use crate::raster::{GrayMap, RasterImage};

/// Per-channel 3x3 median with edge replication.
pub fn median3x3(img: &RasterImage) -> RasterImage {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut out = img.clone();
    let mut window = [0u8; 9];
    for y in 0..h {
        for x in 0..w {
            let mut px = [0u8; 3];
            for (c, slot) in px.iter_mut().enumerate() {
                let mut k = 0;
                for dy in -1..=1 {
                    let sy = (y + dy).clamp(0, h - 1) as u32;
                    for dx in -1..=1 {
                        let sx = (x + dx).clamp(0, w - 1) as u32;
                        window[k] = img.pixel(sx, sy)[c];
                        k += 1;
                    }
                }
                window.sort_unstable();
                *slot = window[4];
            }
            out.set_pixel(x as u32, y as u32, px);
        }
    }
    out
}

/// `max_c |img_c - median3x3(img)_c| / 255` per pixel.
pub fn noise_residual(img: &RasterImage) -> GrayMap {
    let smooth = median3x3(img);
    let data = img
        .data()
        .chunks_exact(3)
        .zip(smooth.data().chunks_exact(3))
        .map(|(a, b)| {
            let d = a.iter().zip(b).map(|(&p, &q)| p.abs_diff(q)).max().unwrap_or(0);
            d as f64 / 255.0
        })
        .collect();
    GrayMap::from_clipped(img.width(), img.height(), data)
}
