use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Map};
use vcrkit::evalkit::{
    bbox_eval, binarize_map, box_fill_mask, detection_metrics, map_to_detection, pixel_metrics, weighted_average,
    BBoxSample, DetectionRecord, DEFAULT_THRESHOLD,
};
use vcrkit::manifest::{read_jsonl_file, Manifest, ManifestEntry, PredictionRecord};
use vcrkit::{BinaryMask, GrayMap, Label, RasterImage};

use super::{required, write_text, EvalArgs};

const DEFAULT_GROUP: &str = "all";

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Det,
    Loc,
    Bbox,
}

struct Ctx<'a> {
    manifest: &'a Manifest,
    pred_dir: PathBuf,
    threshold: f64,
}

impl Ctx<'_> {
    fn pred_mask(&self, p: &PredictionRecord, dims: (u32, u32)) -> Result<BinaryMask> {
        match &p.mask {
            Some(path) => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    self.pred_dir.join(path)
                };
                Ok(binarize_map(&GrayMap::load(&path)?, self.threshold))
            }
            None => Ok(box_fill_mask(&p.boxes, dims.0, dims.1)?),
        }
    }

    fn gt_mask(&self, e: &ManifestEntry) -> Result<BinaryMask> {
        if let Some(m) = self.manifest.load_mask(e)? {
            return Ok(m);
        }
        let img = RasterImage::load(self.manifest.resolve(&e.image))?;
        let boxes = self.manifest.gt_boxes(e)?;
        Ok(box_fill_mask(&boxes, img.width(), img.height())?)
    }

    fn pred_label(&self, p: &PredictionRecord) -> Result<Label> {
        if let Some(l) = p.pred_label {
            return Ok(l);
        }
        if let Some(path) = &p.mask {
            let path = if path.is_absolute() {
                path.clone()
            } else {
                self.pred_dir.join(path)
            };
            let map = GrayMap::load(&path)?;
            return Ok(map_to_detection(&binarize_map(&map, self.threshold)));
        }
        Ok(if p.boxes.is_empty() { Label::Real } else { Label::Fake })
    }
}

pub fn run(a: EvalArgs) -> Result<()> {
    let mode = match a.mode.as_str() {
        "det" => Mode::Det,
        "loc" => Mode::Loc,
        "bbox" => Mode::Bbox,
        other => bail!("unknown eval mode `{other}` (expected det, loc or bbox)"),
    };
    let pred_path = required(&a.predictions, "predictions")?;
    let manifest = Manifest::load(required(&a.manifest, "manifest")?)?;
    let group_by = a.group_by.clone().unwrap_or_else(|| "dataset".into());
    if group_by != "dataset" && group_by != "none" {
        bail!("--group-by must be `dataset` or `none`");
    }
    let threshold = a.threshold.unwrap_or(DEFAULT_THRESHOLD);

    let mut preds: HashMap<String, PredictionRecord> = HashMap::new();
    for (line, p) in
        read_jsonl_file::<PredictionRecord>(&pred_path).with_context(|| format!("reading {}", pred_path.display()))?
    {
        if manifest.get(&p.sample_id).is_none() {
            bail!("ManifestMismatch: line {line}: sample {} not in manifest", p.sample_id);
        }
        if preds.insert(p.sample_id.clone(), p).is_some() {
            bail!("line {line}: duplicate prediction");
        }
    }
    let ctx = Ctx {
        manifest: &manifest,
        pred_dir: pred_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        threshold,
    };

    // Group manifest entries, preserving manifest order inside each group.
    let mut groups: BTreeMap<String, Vec<(&ManifestEntry, &PredictionRecord)>> = BTreeMap::new();
    for e in manifest.entries() {
        let p = preds
            .get(&e.sample_id)
            .ok_or_else(|| anyhow!("MissingPrediction: sample {} has no prediction", e.sample_id))?;
        let key = match (group_by.as_str(), &e.dataset) {
            ("dataset", Some(d)) => d.clone(),
            _ => DEFAULT_GROUP.to_string(),
        };
        groups.entry(key).or_default().push((e, p));
    }

    let mut per_dataset = Map::new();
    let mut weighted: BTreeMap<&str, Vec<(f64, usize)>> = BTreeMap::new();
    for (name, items) in &groups {
        let (metrics, n) = match mode {
            Mode::Det => {
                let records = items
                    .iter()
                    .map(|(e, p)| {
                        Ok(DetectionRecord {
                            sample_id: e.sample_id.clone(),
                            gt_label: e.label,
                            pred_label: ctx.pred_label(p)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let m = detection_metrics(&records)?;
                weighted.entry("f1").or_default().push((m.f1, records.len()));
                weighted
                    .entry("accuracy")
                    .or_default()
                    .push((m.accuracy, records.len()));
                (serde_json::to_value(m)?, records.len())
            }
            Mode::Loc => {
                let (mut f1, mut iou, mut n) = (0.0, 0.0, 0usize);
                for (e, p) in items.iter().filter(|(e, _)| e.label == Label::Fake) {
                    let gt = ctx
                        .gt_mask(e)
                        .with_context(|| format!("ground truth of sample {}", e.sample_id))?;
                    let pred = ctx.pred_mask(p, gt.dimensions())?;
                    let m = pixel_metrics(&pred, &gt).with_context(|| format!("sample {}", e.sample_id))?;
                    f1 += m.f1;
                    iou += m.iou;
                    n += 1;
                }
                if n == 0 {
                    continue;
                }
                let (f1, iou) = (f1 / n as f64, iou / n as f64);
                weighted.entry("f1").or_default().push((f1, n));
                weighted.entry("iou").or_default().push((iou, n));
                (json!({"f1": f1, "iou": iou}), n)
            }
            Mode::Bbox => {
                let samples = items
                    .iter()
                    .filter(|(e, _)| e.label == Label::Fake)
                    .map(|(e, p)| {
                        Ok(BBoxSample {
                            gt_label: e.label,
                            pred: p.boxes.clone(),
                            gt: manifest.gt_boxes(e)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if samples.is_empty() {
                    continue;
                }
                let v = bbox_eval(&samples)?;
                weighted.entry("bbox_iou").or_default().push((v, samples.len()));
                (json!({"bbox_iou": v}), samples.len())
            }
        };
        let mut m = metrics;
        m["n"] = json!(n);
        per_dataset.insert(name.clone(), m);
    }
    if per_dataset.is_empty() {
        bail!("no samples to evaluate");
    }

    let mut avg = Map::new();
    for (metric, items) in &weighted {
        avg.insert(metric.to_string(), json!(weighted_average(items)?));
    }
    let report = json!({
        "mode": a.mode,
        "per_dataset": per_dataset,
        "weighted_avg": avg,
    });
    let text = serde_json::to_string(&report)?;
    if let Some(out) = &a.out {
        write_text(out, &format!("{text}\n"))?;
    }
    println!("{text}");
    Ok(())
}
