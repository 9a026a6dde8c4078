//! Subcommand arguments and implementations.
//!
//! Every option is optional at the clap level so it can also come from the
//! config file; required values are checked after merging.

pub mod build;
pub mod degrade;
pub mod eval;
pub mod mask2box;
pub mod rewards;
pub mod tool;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Args, Serialize, Deserialize)]
pub struct ToolCmdArgs {
    /// Tool name: ELA, FFT, NPP or zoom_in.
    pub name: String,
    /// Input image.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Output PNG.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// ELA recompression quality.
    #[arg(long)]
    pub quality: Option<u8>,
    /// ELA residual gain.
    #[arg(long)]
    pub amplification: Option<f64>,
    /// FFT mode: global_spectrum or high_freq_heatmap.
    #[arg(long)]
    pub fft_mode: Option<String>,
    /// FFT heatmap tile size.
    #[arg(long)]
    pub block_size: Option<u32>,
    /// FFT heatmap radial cutoff as a fraction of Nyquist.
    #[arg(long)]
    pub radial_cutoff: Option<f64>,
    /// Zoom-in rectangle `x1,y1,x2,y2`.
    #[arg(long)]
    pub bbox: Option<String>,
    /// Zoom-in minimum output short side.
    #[arg(long)]
    pub min_side: Option<u32>,
    /// Precomputed NPP map to load instead of the built-in surrogate.
    #[arg(long)]
    pub external_map: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
pub struct RewardsArgs {
    /// Completions JSONL: {sample_id, completion}.
    #[arg(long)]
    pub completions: Option<PathBuf>,
    /// Ground-truth manifest JSONL.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Report JSONL to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Completions per group; defaults to all completions of a sample.
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub lambda_cls: Option<f64>,
    #[arg(long)]
    pub lambda_loc: Option<f64>,
    #[arg(long)]
    pub lambda_tool: Option<f64>,
    /// IoU that a tool-using fake verdict must exceed to earn the tool reward.
    #[arg(long)]
    pub tau_iou: Option<f64>,
}

#[derive(Args, Serialize, Deserialize)]
pub struct BuildTrajArgs {
    /// Scores JSONL: {sample_id, label, p_base, tools}.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Samples manifest JSONL.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Corpus JSONL to write; tool outputs go to `<stem>_artifacts/` beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Build report JSON; defaults to `<stem>.report.json` beside the corpus.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Validity threshold.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Truncation length for tampered samples.
    #[arg(long)]
    pub k_fake: Option<usize>,
    /// Truncation length for authentic samples.
    #[arg(long)]
    pub k_real: Option<usize>,
    #[arg(long)]
    pub quality: Option<u8>,
    #[arg(long)]
    pub amplification: Option<f64>,
    #[arg(long)]
    pub fft_mode: Option<String>,
    #[arg(long)]
    pub block_size: Option<u32>,
    #[arg(long)]
    pub radial_cutoff: Option<f64>,
    #[arg(long)]
    pub min_side: Option<u32>,
}

#[derive(Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// det, loc or bbox.
    pub mode: String,
    /// Predictions JSONL: {sample_id, pred_label, boxes, mask}.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Ground-truth manifest JSONL.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grouping: `dataset` (manifest field) or `none`.
    #[arg(long)]
    pub group_by: Option<String>,
    /// Binarization threshold for predicted probability maps.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Serialize, Deserialize)]
pub struct DegradeArgs {
    /// jpeg, noise, blur or resize.
    #[arg(long)]
    pub op: Option<String>,
    /// Comma-separated parameter sweep (quality, sigma, kernel or rate).
    #[arg(long)]
    pub param: Option<String>,
    /// Base seed for noise; mixed with each file's relative path.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Input image tree.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Output root; each sweep value gets `<op>_<param>/`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest to rewrite against the degraded images.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Keep going past unreadable files (still exits 1 if any failed).
    #[arg(long)]
    pub continue_on_error: bool,
}

#[derive(Args, Serialize, Deserialize)]
pub struct Mask2BoxArgs {
    /// Mask images (nonzero = tampered).
    pub masks: Vec<PathBuf>,
}

pub(crate) fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value.clone().ok_or_else(|| anyhow!("missing required option --{flag}"))
}

pub(crate) fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

pub(crate) fn parse_fft_mode(s: &str) -> Result<vcrkit::toolbox::FftMode> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| anyhow!("unknown FFT mode `{s}` (expected global_spectrum or high_freq_heatmap)"))
}

/// Tool configuration from the shared flags, defaults for anything unset.
pub(crate) fn tool_args(
    quality: Option<u8>,
    amplification: Option<f64>,
    fft_mode: Option<&str>,
    block_size: Option<u32>,
    radial_cutoff: Option<f64>,
    min_side: Option<u32>,
) -> Result<vcrkit::toolbox::ToolArgs> {
    let mut args = vcrkit::toolbox::ToolArgs::default();
    if let Some(q) = quality {
        args.ela.quality = q;
    }
    if let Some(a) = amplification {
        args.ela.amplification = a;
    }
    if let Some(m) = fft_mode {
        args.fft.mode = parse_fft_mode(m)?;
    }
    if let Some(b) = block_size {
        args.fft.block_size = b;
    }
    if let Some(r) = radial_cutoff {
        args.fft.radial_cutoff = r;
    }
    if let Some(s) = min_side {
        args.min_side = s;
    }
    Ok(args)
}
