//! Deterministic synthetic images for fixtures and demos.
//!
//! `photo_texture` produces smooth multi-scale structure with fine sensor-like
//! grain, which compresses like a natural photograph rather than like flat
//! test patterns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codec::{jpeg_round_trip, CodecError};
use crate::geometry::BoundingBox;
use crate::raster::RasterImage;

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// One octave of value noise on a `cell`-pixel lattice, values in [0, 1].
fn value_noise(w: u32, h: u32, cell: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let gw = (w / cell + 2) as usize;
    let gh = (h / cell + 2) as usize;
    let lattice: Vec<f64> = (0..gw * gh).map(|_| rng.random::<f64>()).collect();
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        let gy = (y / cell) as usize;
        let ty = smoothstep((y % cell) as f64 / cell as f64);
        for x in 0..w {
            let gx = (x / cell) as usize;
            let tx = smoothstep((x % cell) as f64 / cell as f64);
            let at = |i: usize, j: usize| lattice[j * gw + i];
            let top = at(gx, gy) * (1.0 - tx) + at(gx + 1, gy) * tx;
            let bottom = at(gx, gy + 1) * (1.0 - tx) + at(gx + 1, gy + 1) * tx;
            out.push(top * (1.0 - ty) + bottom * ty);
        }
    }
    out
}

/// Photo-like RGB texture: multi-octave luminance, slow color tint and
/// Gaussian grain.
pub fn photo_texture(width: u32, height: u32, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let octaves = [(64, 0.45), (32, 0.25), (16, 0.15), (8, 0.1), (4, 0.05)];
    let mut luma = vec![0.0; (width * height) as usize];
    for (cell, amp) in octaves {
        for (l, v) in luma.iter_mut().zip(value_noise(width, height, cell, &mut rng)) {
            *l += amp * v;
        }
    }
    let tint_r = value_noise(width, height, 48, &mut rng);
    let tint_b = value_noise(width, height, 48, &mut rng);
    let grain = Normal::new(0.0, 0.5).expect("valid sigma");
    let mut data = Vec::with_capacity(luma.len() * 3);
    for i in 0..luma.len() {
        let base = 30.0 + 200.0 * luma[i];
        let rgb = [base + 40.0 * (tint_r[i] - 0.5), base, base + 40.0 * (tint_b[i] - 0.5)];
        for c in rgb {
            let v = c + grain.sample(&mut rng);
            data.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    RasterImage::new(width, height, data).expect("buffer sized from dimensions")
}

/// Double-compression splice: a `patch`-sized region that went through a
/// low-quality JPEG is pasted at `(x, y)` into a high-quality background.
/// Returns the composite and the pasted rectangle.
pub fn splice_fixture(
    size: u32,
    patch: u32,
    x: u32,
    y: u32,
    seed: u64,
    background_quality: u8,
    patch_quality: u8,
) -> Result<(RasterImage, BoundingBox), CodecError> {
    assert!(
        x + patch <= size && y + patch <= size,
        "patch must fit inside the image"
    );
    let background = jpeg_round_trip(&photo_texture(size, size, seed), background_quality)?;
    let donor = jpeg_round_trip(&photo_texture(patch, patch, seed ^ 0x5eed_f00d), patch_quality)?;
    let mut out = background;
    for py in 0..patch {
        for px in 0..patch {
            out.set_pixel(x + px, y + py, donor.pixel(px, py));
        }
    }
    let region = BoundingBox::new(x, y, x + patch, y + patch).expect("patch has positive size");
    Ok((out, region))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(photo_texture(40, 30, 7), photo_texture(40, 30, 7));
        assert_ne!(photo_texture(40, 30, 7), photo_texture(40, 30, 8));
    }

    #[test]
    fn splice_region_reported() {
        let (img, region) = splice_fixture(128, 32, 10, 20, 1, 95, 60).unwrap();
        assert_eq!(img.dimensions(), (128, 128));
        assert_eq!(region.coords(), [10, 20, 42, 52]);
    }
}
