//! In-memory JPEG round trips.
//!
//! A fresh encoder and decoder are created on every call, so the helpers are
//! safe to use from any number of threads.

use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};

use crate::raster::RasterImage;

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("JPEG quality {0} outside 1..=100")]
    InvalidQuality(u8),
    #[error("EncodeFailure: {0}")]
    Encode(#[source] image::ImageError),
    #[error("DecodeFailure: {0}")]
    Decode(#[source] image::ImageError),
}

/// Encodes `img` as baseline JPEG at `quality`.
pub fn encode_jpeg(img: &RasterImage, quality: u8) -> Result<Vec<u8>, CodecError> {
    if !(1..=100).contains(&quality) {
        return Err(CodecError::InvalidQuality(quality));
    }
    let mut buf = Vec::new();
    JpegEncoder::new_with_quality(&mut buf, quality)
        .encode(img.data(), img.width(), img.height(), ExtendedColorType::Rgb8)
        .map_err(CodecError::Encode)?;
    Ok(buf)
}

pub fn decode_jpeg(bytes: &[u8]) -> Result<RasterImage, CodecError> {
    let img = image::load(Cursor::new(bytes), ImageFormat::Jpeg).map_err(CodecError::Decode)?;
    Ok(RasterImage::from_rgb_image(img.to_rgb8()))
}

/// Encode then decode at `quality`.
pub fn jpeg_round_trip(img: &RasterImage, quality: u8) -> Result<RasterImage, CodecError> {
    decode_jpeg(&encode_jpeg(img, quality)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_quality_zero() {
        let img = RasterImage::filled(8, 8, [1, 2, 3]).unwrap();
        assert!(matches!(encode_jpeg(&img, 0), Err(CodecError::InvalidQuality(0))));
        assert!(encode_jpeg(&img, 101).is_err());
    }

    #[test]
    fn round_trip_keeps_dimensions() {
        let img = RasterImage::from_fn(37, 21, |x, y| [(x * 7) as u8, (y * 11) as u8, 128]).unwrap();
        let out = jpeg_round_trip(&img, 75).unwrap();
        assert_eq!(out.dimensions(), (37, 21));
    }
}
