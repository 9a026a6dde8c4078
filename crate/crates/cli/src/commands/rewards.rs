use std::collections::HashMap;
use std::io::Write;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;
use vcrkit::manifest::{read_jsonl_file, CompletionRecord, Manifest};
use vcrkit::parser::parse_answer;
use vcrkit::rewards::{grpo_advantages, GroundTruth, RewardBreakdown, RewardWeights, DEFAULT_TAU_IOU};

use super::{create, required, RewardsArgs};

#[derive(Serialize)]
struct ReportLine<'a> {
    sample_id: &'a str,
    r_cls: f64,
    r_loc: f64,
    r_tool: f64,
    r_total: f64,
    hungarian_iou: Option<f64>,
    advantage: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    parse_error: Option<String>,
}

pub fn run(a: RewardsArgs) -> Result<()> {
    let completions_path = required(&a.completions, "completions")?;
    let manifest = Manifest::load(required(&a.manifest, "manifest")?)?;
    let out = required(&a.out, "out")?;
    let defaults = RewardWeights::default();
    let weights = RewardWeights::new(
        a.lambda_cls.unwrap_or(defaults.lambda_cls),
        a.lambda_loc.unwrap_or(defaults.lambda_loc),
        a.lambda_tool.unwrap_or(defaults.lambda_tool),
    )?;
    let tau_iou = a.tau_iou.unwrap_or(DEFAULT_TAU_IOU);
    if a.group_size == Some(0) {
        bail!("--group-size must be at least 1");
    }

    let records: Vec<(usize, CompletionRecord)> =
        read_jsonl_file(&completions_path).with_context(|| format!("reading {}", completions_path.display()))?;

    // Score every completion, in file order.
    let mut truths: HashMap<&str, GroundTruth> = HashMap::new();
    let mut scored = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let Some(entry) = manifest.get(&rec.sample_id) else {
            bail!(
                "ManifestMismatch: line {line}: sample {} not in manifest",
                rec.sample_id
            );
        };
        if !truths.contains_key(rec.sample_id.as_str()) {
            let gt = GroundTruth::new(entry.label, manifest.gt_boxes(entry)?)
                .with_context(|| format!("ground truth of sample {}", rec.sample_id))?;
            truths.insert(rec.sample_id.as_str(), gt);
        }
        let gt = &truths[rec.sample_id.as_str()];
        scored.push(match parse_answer(&rec.completion) {
            Ok(ans) => (RewardBreakdown::compute(&ans, gt, &weights, tau_iou), None),
            Err(e) => (RewardBreakdown::unparseable(gt), Some(e.kind().to_string())),
        });
    }

    // Group per sample (first-appearance order), then in chunks of G.
    let mut per_sample: Vec<(&str, Vec<usize>)> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for (i, (_, rec)) in records.iter().enumerate() {
        let k = *slot.entry(rec.sample_id.as_str()).or_insert_with(|| {
            per_sample.push((rec.sample_id.as_str(), Vec::new()));
            per_sample.len() - 1
        });
        per_sample[k].1.push(i);
    }
    let mut advantages = vec![0.0; records.len()];
    let mut groups = 0usize;
    for (sample_id, idx) in &per_sample {
        let g = a.group_size.unwrap_or(idx.len());
        if idx.len() % g != 0 {
            bail!(
                "sample {sample_id} has {} completions, not divisible into groups of {g}",
                idx.len()
            );
        }
        for chunk in idx.chunks(g) {
            let totals: Vec<f64> = chunk.iter().map(|&i| scored[i].0.r_total).collect();
            for (&i, adv) in chunk.iter().zip(grpo_advantages(&totals)?) {
                advantages[i] = adv;
            }
            groups += 1;
        }
    }

    let mut w = create(&out)?;
    let mut parse_errors = 0usize;
    for (i, (_, rec)) in records.iter().enumerate() {
        let (b, err) = &scored[i];
        parse_errors += err.is_some() as usize;
        let line = ReportLine {
            sample_id: &rec.sample_id,
            r_cls: b.r_cls,
            r_loc: b.r_loc,
            r_tool: b.r_tool,
            r_total: b.r_total,
            hungarian_iou: b.hungarian_iou,
            advantage: advantages[i],
            parse_error: err.clone(),
        };
        writeln!(w, "{}", serde_json::to_string(&line)?)?;
    }
    w.flush()?;

    let mean = if scored.is_empty() {
        0.0
    } else {
        scored.iter().map(|(b, _)| b.r_total).sum::<f64>() / scored.len() as f64
    };
    println!(
        "{}",
        json!({
            "completions": records.len(),
            "groups": groups,
            "parse_errors": parse_errors,
            "mean_r_total": mean,
        })
    );
    Ok(())
}
