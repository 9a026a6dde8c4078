//! Composite rewards for tool-using forgery completions and group-relative
//! (GRPO) advantages.
//!
//! For a completion with verdict `ĉ`, boxes `B̂` and tool flag `u`, against
//! ground truth `c` with boxes `B`:
//!
//! ```text
//! r_cls  = [ĉ = c] · (1 if c = real, [B̂ ≠ ∅] if c = fake)
//! r_loc  = HungarianIoU(B̂, B) · [c = fake]
//! r_tool = u · ([c = real] · r_cls + [c = fake] · [HungarianIoU > τ_iou])
//! r_total = λ_cls r_cls + λ_loc r_loc + λ_tool r_tool
//! ```
//!
//! Advantages are z-scores of `r_total` within a group, using the population
//! standard deviation; a group whose spread is below `1e-12` gets all-zero
//! advantages.

pub mod hungarian;

use serde::{Deserialize, Serialize};

use crate::geometry::{box_iou, BoundingBox};
use crate::parser::ParsedAnswer;
use crate::Label;

/// Default IoU threshold for the tool utility reward.
pub const DEFAULT_TAU_IOU: f64 = 0.5;

/// Spread below which a group is treated as constant.
pub const DEGENERATE_STD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RewardError {
    #[error("EmptyGroundTruth: localization needs at least one ground-truth box")]
    EmptyGroundTruth,
    #[error("EmptyGroup: advantages need at least one reward")]
    EmptyGroup,
    #[error("MissingGtBox: fake ground truth without boxes")]
    MissingGtBox,
    #[error("invalid reward weights {0:?}: every weight must be finite and non-negative")]
    InvalidWeights([f64; 3]),
    #[error("group mixes different ground truths")]
    MixedGroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub lambda_cls: f64,
    pub lambda_loc: f64,
    pub lambda_tool: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            lambda_cls: 1.0,
            lambda_loc: 2.0,
            lambda_tool: 0.5,
        }
    }
}

impl RewardWeights {
    pub fn new(lambda_cls: f64, lambda_loc: f64, lambda_tool: f64) -> Result<Self, RewardError> {
        let w = [lambda_cls, lambda_loc, lambda_tool];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(RewardError::InvalidWeights(w));
        }
        Ok(Self {
            lambda_cls,
            lambda_loc,
            lambda_tool,
        })
    }
}

/// Label and boxes for one query. Fake truths carry at least one box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    label: Label,
    boxes: Vec<BoundingBox>,
}

impl GroundTruth {
    pub fn new(label: Label, boxes: Vec<BoundingBox>) -> Result<Self, RewardError> {
        if label == Label::Fake && boxes.is_empty() {
            return Err(RewardError::MissingGtBox);
        }
        Ok(Self { label, boxes })
    }

    pub fn real() -> Self {
        Self {
            label: Label::Real,
            boxes: Vec::new(),
        }
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn boxes(&self) -> &[BoundingBox] {
        &self.boxes
    }
}

/// Mean IoU over an optimal one-to-one matching of `pred` to `gt`.
///
/// Only the `min(|pred|, |gt|)` matched pairs enter the mean; unmatched
/// boxes on either side are ignored. An empty prediction scores 0.
pub fn hungarian_iou(pred: &[BoundingBox], gt: &[BoundingBox]) -> Result<f64, RewardError> {
    if gt.is_empty() {
        return Err(RewardError::EmptyGroundTruth);
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let iou: Vec<Vec<f64>> = pred
        .iter()
        .map(|p| gt.iter().map(|g| box_iou(p, g)).collect())
        .collect();
    let cost: Vec<Vec<f64>> = iou.iter().map(|row| row.iter().map(|v| 1.0 - v).collect()).collect();
    let pairs = hungarian::solve_rectangular(&cost, gt.len(), 1.0);
    let sum: f64 = pairs.iter().map(|&(p, g)| iou[p][g]).sum();
    Ok(sum / pairs.len() as f64)
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Classification reward; a fake verdict needs at least one box.
pub fn r_cls(pred: &ParsedAnswer, gt_label: Label) -> f64 {
    let correct = pred.label == gt_label;
    match gt_label {
        Label::Real => indicator(correct),
        Label::Fake => indicator(correct && !pred.boxes.is_empty()),
    }
}

/// Localization reward, zero for authentic images.
pub fn r_loc(pred: &ParsedAnswer, gt: &GroundTruth) -> f64 {
    match gt.label {
        Label::Real => 0.0,
        Label::Fake => hungarian_iou(&pred.boxes, &gt.boxes).expect("fake ground truth carries boxes"),
    }
}

/// Tool utility reward. The IoU must strictly exceed `tau_iou`.
pub fn r_tool(tool_used: bool, gt_label: Label, r_cls_value: f64, h_iou: f64, tau_iou: f64) -> f64 {
    if !tool_used {
        return 0.0;
    }
    match gt_label {
        Label::Real => r_cls_value,
        Label::Fake => indicator(h_iou > tau_iou),
    }
}

pub fn r_total(r_cls: f64, r_loc: f64, r_tool: f64, w: &RewardWeights) -> f64 {
    w.lambda_cls * r_cls + w.lambda_loc * r_loc + w.lambda_tool * r_tool
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub r_cls: f64,
    pub r_loc: f64,
    pub r_tool: f64,
    pub r_total: f64,
    /// Present for fake ground truth only.
    pub hungarian_iou: Option<f64>,
}

impl RewardBreakdown {
    /// Scores one parsed completion.
    pub fn compute(pred: &ParsedAnswer, gt: &GroundTruth, weights: &RewardWeights, tau_iou: f64) -> Self {
        let h_iou = match gt.label {
            Label::Fake => Some(hungarian_iou(&pred.boxes, &gt.boxes).expect("fake ground truth carries boxes")),
            Label::Real => None,
        };
        let cls = r_cls(pred, gt.label);
        let loc = h_iou.unwrap_or(0.0);
        let tool = r_tool(pred.tool_used, gt.label, cls, h_iou.unwrap_or(0.0), tau_iou);
        Self {
            r_cls: cls,
            r_loc: loc,
            r_tool: tool,
            r_total: r_total(cls, loc, tool, weights),
            hungarian_iou: h_iou,
        }
    }

    /// Breakdown for a completion that could not be parsed.
    pub fn unparseable(gt: &GroundTruth) -> Self {
        Self {
            r_cls: 0.0,
            r_loc: 0.0,
            r_tool: 0.0,
            r_total: 0.0,
            hungarian_iou: gt.label.is_fake().then_some(0.0),
        }
    }
}

/// Group-relative advantages `(R_i - mean) / std` with population std.
pub fn grpo_advantages(rewards: &[f64]) -> Result<Vec<f64>, RewardError> {
    if rewards.is_empty() {
        return Err(RewardError::EmptyGroup);
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < DEGENERATE_STD {
        return Ok(vec![0.0; rewards.len()]);
    }
    Ok(rewards.iter().map(|r| (r - mean) / std).collect())
}

/// One completion of a group together with the query's ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    pub completion: ParsedAnswer,
    pub ground_truth: GroundTruth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredSample {
    pub breakdown: RewardBreakdown,
    pub advantage: f64,
}

/// Scores every completion of one group and normalizes the totals.
pub fn score_group(
    samples: &[GroupSample],
    weights: &RewardWeights,
    tau_iou: f64,
) -> Result<Vec<ScoredSample>, RewardError> {
    let first = samples.first().ok_or(RewardError::EmptyGroup)?;
    if samples.iter().any(|s| s.ground_truth != first.ground_truth) {
        return Err(RewardError::MixedGroundTruth);
    }
    let breakdowns: Vec<RewardBreakdown> = samples
        .iter()
        .map(|s| RewardBreakdown::compute(&s.completion, &s.ground_truth, weights, tau_iou))
        .collect();
    let totals: Vec<f64> = breakdowns.iter().map(|b| b.r_total).collect();
    let advantages = grpo_advantages(&totals)?;
    Ok(breakdowns
        .into_iter()
        .zip(advantages)
        .map(|(breakdown, advantage)| ScoredSample { breakdown, advantage })
        .collect())
}
