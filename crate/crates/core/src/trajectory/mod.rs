//! Gain-driven tool selection and multi-trajectory synthesis.
//!
//! Stage 1 ranks the tools whose score beats both the tool-free baseline and
//! the validity threshold, rejecting samples no configuration solves. Stage 2
//! expands a ranking into the direct path, every single-tool path and every
//! prefix chain of the truncated ranking.

mod build;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use build::{
    build_corpus, materialize_trajectory, zoom_region, BuildReport, BuildSink, SampleArtifacts, ZOOM_MARGIN_PERCENT,
};

use crate::manifest::ManifestError;
use crate::parser::ParseError;
use crate::raster::RasterError;
use crate::toolbox::ToolError;
use crate::{Label, ToolId};

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error("InvalidScore: sample {sample_id}: {message}")]
    InvalidScore { sample_id: String, message: String },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("MissingGtBox: fake sample {0} has no ground-truth box")]
    MissingGtBox(String),
    #[error("ManifestMismatch: {0}")]
    ManifestMismatch(String),
    #[error(transparent)]
    Tool(#[from] ToolError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Baseline and per-tool validity scores of one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScoreRecord {
    pub sample_id: String,
    pub label: Label,
    pub p_base: f64,
    #[serde(rename = "tools", default)]
    pub tool_scores: BTreeMap<ToolId, f64>,
}

impl SampleScoreRecord {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let bad = |what: String| TrajectoryError::InvalidScore {
            sample_id: self.sample_id.clone(),
            message: what,
        };
        if !(0.0..=1.0).contains(&self.p_base) {
            return Err(bad(format!("p_base {} outside [0, 1]", self.p_base)));
        }
        for (tool, &s) in &self.tool_scores {
            if !(0.0..=1.0).contains(&s) {
                return Err(bad(format!("{tool} score {s} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub tau: f64,
    pub k_fake: usize,
    pub k_real: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            tau: 0.5,
            k_fake: 4,
            k_real: 2,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(TrajectoryError::InvalidConfig(format!(
                "tau {} outside [0, 1]",
                self.tau
            )));
        }
        Ok(())
    }

    /// Truncation length for samples of `label`.
    pub fn k_for(&self, label: Label) -> usize {
        match label {
            Label::Fake => self.k_fake,
            Label::Real => self.k_real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SelectionOutcome {
    /// No configuration reaches the threshold; the sample is dropped.
    Rejected,
    /// Tools that beat the baseline, best first. May be empty.
    Ranked(Vec<ToolId>),
}

/// Stage 1: intractable-sample removal and gain-driven ranking.
///
/// Equal scores keep the fixed order ELA, FFT, NPP, zoom_in.
pub fn select_and_rank(rec: &SampleScoreRecord, cfg: &SelectionConfig) -> SelectionOutcome {
    let best_tool = rec.tool_scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    if rec.p_base.max(best_tool) < cfg.tau {
        return SelectionOutcome::Rejected;
    }
    let bar = rec.p_base.max(cfg.tau);
    let mut ranked: Vec<(ToolId, f64)> = ToolId::ALL
        .iter()
        .filter_map(|t| rec.tool_scores.get(t).map(|&s| (*t, s)))
        .filter(|&(_, s)| s > bar)
        .collect();
    // Stable sort keeps the fixed tool order among ties.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    SelectionOutcome::Ranked(ranked.into_iter().map(|(t, _)| t).collect())
}

/// The tool sequences synthesized for one sample; `[]` is direct assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrajectoryPlan {
    pub sample_id: String,
    pub paths: Vec<Vec<ToolId>>,
}

/// Stage 2: the direct path, then each single tool of the truncated ranking,
/// then each prefix of length 2..=K'.
pub fn synthesize_paths(sample_id: &str, ranking: &[ToolId], label: Label, cfg: &SelectionConfig) -> TrajectoryPlan {
    let k = ranking.len().min(cfg.k_for(label));
    let top = &ranking[..k];
    let mut paths = vec![Vec::new()];
    paths.extend(top.iter().map(|t| vec![*t]));
    paths.extend((2..=k).map(|len| top[..len].to_vec()));
    TrajectoryPlan {
        sample_id: sample_id.to_string(),
        paths,
    }
}
