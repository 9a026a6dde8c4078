//! Evaluation protocol: detection and pixel metrics, box IoU evaluation,
//! ground-truth box extraction from masks, per-dataset weighting and the
//! robustness degradations.

mod components;
mod degrade;
mod metrics;

pub use components::{label_components, mask_to_boxes, passes_size_filter, Component, MIN_COMPONENT_PIXELS};
pub use degrade::{degrade, resize_bilinear, resize_mask_nearest, DegradeOp};
pub use metrics::{
    bbox_eval, binarize_map, box_fill_mask, detection_metrics, map_to_detection, pixel_metrics, weighted_average,
    BBoxSample, DetectionMetrics, DetectionRecord, PixelMetrics, ToDetectionMask, DEFAULT_THRESHOLD,
};

use crate::codec::CodecError;
use crate::geometry::GeometryError;
use crate::rewards::RewardError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("EmptyInput: {0}")]
    EmptyInput(&'static str),
    #[error("ShapeMismatch: prediction {pred:?} vs ground truth {gt:?}")]
    ShapeMismatch { pred: (u32, u32), gt: (u32, u32) },
    #[error("InvalidParam: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}
