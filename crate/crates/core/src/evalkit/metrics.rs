use serde::Serialize;

use super::EvalError;
use crate::geometry::{clamp_box, BoundingBox};
use crate::raster::{BinaryMask, GrayMap};
use crate::rewards::hungarian_iou;
use crate::Label;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// `true` where the value strictly exceeds `threshold`.
pub fn binarize_map(map: &GrayMap, threshold: f64) -> BinaryMask {
    let data = map.data().iter().map(|&v| v > threshold).collect();
    BinaryMask::new(map.width(), map.height(), data).expect("same dimensions as the map")
}

/// Anything that can be reduced to a binary localization mask.
pub trait ToDetectionMask {
    fn has_positive_pixel(&self) -> bool;
}

impl ToDetectionMask for BinaryMask {
    fn has_positive_pixel(&self) -> bool {
        self.any()
    }
}

/// Probability maps are binarized at [`DEFAULT_THRESHOLD`].
impl ToDetectionMask for GrayMap {
    fn has_positive_pixel(&self) -> bool {
        self.data().iter().any(|&v| v > DEFAULT_THRESHOLD)
    }
}

/// An image is fake iff its localization output has any positive pixel.
pub fn map_to_detection<M: ToDetectionMask + ?Sized>(m: &M) -> Label {
    if m.has_positive_pixel() {
        Label::Fake
    } else {
        Label::Real
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionRecord {
    pub sample_id: String,
    pub gt_label: Label,
    pub pred_label: Label,
}

/// Image-level scores with fake as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

pub fn detection_metrics(records: &[DetectionRecord]) -> Result<DetectionMetrics, EvalError> {
    if records.is_empty() {
        return Err(EvalError::EmptyInput("no detection records"));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for r in records {
        match (r.gt_label, r.pred_label) {
            (Label::Fake, Label::Fake) => tp += 1,
            (Label::Real, Label::Fake) => fp += 1,
            (Label::Real, Label::Real) => tn += 1,
            (Label::Fake, Label::Real) => fn_ += 1,
        }
    }
    let denom = 2 * tp + fp + fn_;
    let f1 = if denom == 0 {
        0.0
    } else {
        (2 * tp) as f64 / denom as f64
    };
    Ok(DetectionMetrics {
        f1,
        accuracy: (tp + tn) as f64 / records.len() as f64,
        tp,
        fp,
        tn,
        fn_,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PixelMetrics {
    pub f1: f64,
    pub iou: f64,
}

/// Per-image pixel F1 and IoU of the tampered class.
///
/// With an empty ground truth the image scores (1, 1) if the prediction is
/// empty too and (0, 0) otherwise.
pub fn pixel_metrics(pred: &BinaryMask, gt: &BinaryMask) -> Result<PixelMetrics, EvalError> {
    if pred.dimensions() != gt.dimensions() {
        return Err(EvalError::ShapeMismatch {
            pred: pred.dimensions(),
            gt: gt.dimensions(),
        });
    }
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp + fn_ == 0 {
        let v = if fp == 0 { 1.0 } else { 0.0 };
        return Ok(PixelMetrics { f1: v, iou: v });
    }
    Ok(PixelMetrics {
        f1: (2 * tp) as f64 / (2 * tp + fp + fn_) as f64,
        iou: tp as f64 / (tp + fp + fn_) as f64,
    })
}

/// Boxes of one sample for box-level evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BBoxSample {
    pub gt_label: Label,
    pub pred: Vec<BoundingBox>,
    pub gt: Vec<BoundingBox>,
}

/// Mean Hungarian IoU over the fake samples; real samples are skipped.
pub fn bbox_eval(samples: &[BBoxSample]) -> Result<f64, EvalError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in samples.iter().filter(|s| s.gt_label == Label::Fake) {
        sum += hungarian_iou(&s.pred, &s.gt)?;
        n += 1;
    }
    if n == 0 {
        return Err(EvalError::EmptyInput("no fake samples for box evaluation"));
    }
    Ok(sum / n as f64)
}

/// `Σ nᵢ mᵢ / Σ nᵢ` over `(metric, count)` pairs.
pub fn weighted_average(per_dataset: &[(f64, usize)]) -> Result<f64, EvalError> {
    if per_dataset.is_empty() {
        return Err(EvalError::EmptyInput("no datasets to average"));
    }
    if let Some((_, n)) = per_dataset.iter().find(|(_, n)| *n == 0) {
        return Err(EvalError::InvalidParam(format!("dataset weight {n} must be >= 1")));
    }
    let total: usize = per_dataset.iter().map(|(_, n)| n).sum();
    let acc: f64 = per_dataset.iter().map(|(m, n)| m * *n as f64).sum();
    Ok(acc / total as f64)
}

/// Mask covering the union of `boxes`, each clipped to `width x height`.
pub fn box_fill_mask(boxes: &[BoundingBox], width: u32, height: u32) -> Result<BinaryMask, EvalError> {
    let mut mask =
        BinaryMask::empty(width, height).map_err(|_| EvalError::InvalidParam(format!("mask size {width}x{height}")))?;
    for b in boxes {
        let c = clamp_box(b.coords().map(i64::from), width, height)?;
        for y in c.y1()..c.y2() {
            for x in c.x1()..c.x2() {
                mask.set(x, y, true);
            }
        }
    }
    Ok(mask)
}
