use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{select_and_rank, synthesize_paths, SampleScoreRecord, SelectionConfig, SelectionOutcome, TrajectoryError};
use crate::geometry::{clamp_box, BoundingBox};
use crate::manifest::Manifest;
use crate::parser::{
    render_answer, serialize_trajectory, Role, ToolCall, Trajectory, Turn, IMAGE_PLACEHOLDER, USER_PROMPT,
};
use crate::raster::RasterImage;
use crate::toolbox::{run_tool, ToolArgs};
use crate::{Label, ToolId};

/// Margin added on each side of the ground-truth union for zoom-in calls,
/// as a percentage of the union's side length (rounded up).
pub const ZOOM_MARGIN_PERCENT: u64 = 10;

/// Zoom-in rectangle for a tampered sample: the union of the ground-truth
/// boxes grown by [`ZOOM_MARGIN_PERCENT`] per side and clamped to the image.
pub fn zoom_region(gt_boxes: &[BoundingBox], width: u32, height: u32) -> Option<BoundingBox> {
    let union = gt_boxes.iter().copied().reduce(|a, b| a.union_rect(&b))?;
    let mx = (u64::from(union.width()) * ZOOM_MARGIN_PERCENT).div_ceil(100) as i64;
    let my = (u64::from(union.height()) * ZOOM_MARGIN_PERCENT).div_ceil(100) as i64;
    let [x1, y1, x2, y2] = union.coords().map(i64::from);
    clamp_box([x1 - mx, y1 - my, x2 + mx, y2 + my], width, height).ok()
}

/// Lazily executed tool outputs of one sample, shared across its paths.
pub struct SampleArtifacts {
    sample_id: String,
    label: Label,
    gt_boxes: Vec<BoundingBox>,
    image_path: PathBuf,
    image_ref: String,
    tool_args: ToolArgs,
    output: Option<(PathBuf, String)>,
    image: Option<RasterImage>,
    rendered: HashMap<ToolId, String>,
}

impl SampleArtifacts {
    /// The image is loaded from `image_path` on first tool use and referred
    /// to by that path in the user turn.
    pub fn new(
        sample_id: impl Into<String>,
        label: Label,
        gt_boxes: Vec<BoundingBox>,
        image_path: impl Into<PathBuf>,
    ) -> Self {
        let image_path = image_path.into();
        Self {
            sample_id: sample_id.into(),
            label,
            gt_boxes,
            image_ref: image_path.display().to_string(),
            image_path,
            tool_args: ToolArgs::default(),
            output: None,
            image: None,
            rendered: HashMap::new(),
        }
    }

    /// Supplies the decoded image directly.
    pub fn with_image(mut self, image: RasterImage) -> Self {
        self.image = Some(image);
        self
    }

    pub fn with_tool_args(mut self, args: ToolArgs) -> Self {
        self.tool_args = args;
        self
    }

    /// Tool outputs are written as `{dir}/{sample}_{tool}.png` and referenced
    /// as `{prefix}{sample}_{tool}.png`. Without an output, references are
    /// produced but nothing is written.
    pub fn with_output(mut self, dir: impl Into<PathBuf>, prefix: impl Into<String>) -> Self {
        self.output = Some((dir.into(), prefix.into()));
        self
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    fn image(&mut self) -> Result<&RasterImage, TrajectoryError> {
        if self.image.is_none() {
            self.image = Some(RasterImage::load(&self.image_path)?);
        }
        Ok(self.image.as_ref().expect("loaded above"))
    }

    /// Zoom-in rectangle: around the ground truth for tampered samples, the
    /// whole frame for authentic ones.
    pub fn zoom_bbox(&mut self) -> Result<[i64; 4], TrajectoryError> {
        let (w, h) = self.image()?.dimensions();
        match self.label {
            Label::Real => Ok([0, 0, i64::from(w), i64::from(h)]),
            Label::Fake => zoom_region(&self.gt_boxes, w, h)
                .map(|b| b.coords().map(i64::from))
                .ok_or_else(|| TrajectoryError::MissingGtBox(self.sample_id.clone())),
        }
    }

    fn file_name(&self, tool: ToolId) -> String {
        let safe: String = self
            .sample_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        format!("{safe}_{}.png", tool.name())
    }

    /// Runs `tool` once per sample and returns the reference to its output.
    fn render(&mut self, tool: ToolId) -> Result<String, TrajectoryError> {
        if let Some(r) = self.rendered.get(&tool) {
            return Ok(r.clone());
        }
        let mut args = self.tool_args.clone();
        args.bbox = None;
        if tool == ToolId::ZoomIn {
            args.bbox = Some(self.zoom_bbox()?);
        }
        if tool != ToolId::Npp {
            args.external_map = None;
        }
        let out = run_tool(tool, self.image()?, &args)?;
        let name = self.file_name(tool);
        let reference = match &self.output {
            Some((dir, prefix)) => {
                out.output.save_png(dir.join(&name))?;
                format!("{prefix}{name}")
            }
            None => name,
        };
        self.rendered.insert(tool, reference.clone());
        Ok(reference)
    }
}

/// Builds the conversation for one tool path: the question, one call and
/// response per tool, and the ground-truth verdict.
pub fn materialize_trajectory(path: &[ToolId], sample: &mut SampleArtifacts) -> Result<Trajectory, TrajectoryError> {
    if sample.label == Label::Fake && sample.gt_boxes.is_empty() {
        return Err(TrajectoryError::MissingGtBox(sample.sample_id.clone()));
    }
    let mut turns = vec![Turn::new(Role::User, USER_PROMPT).with_images(vec![sample.image_ref.clone()])];
    for &tool in path {
        let call = match tool {
            ToolId::ZoomIn => ToolCall::zoom_in(sample.zoom_bbox()?),
            other => ToolCall::new(other)?,
        };
        let reference = sample.render(tool)?;
        turns.push(Turn::new(Role::Assistant, "").with_tool_calls(vec![call]));
        turns.push(Turn::new(Role::ToolResponse, IMAGE_PLACEHOLDER).with_images(vec![reference]));
    }
    let boxes: &[BoundingBox] = match sample.label {
        Label::Fake => &sample.gt_boxes,
        Label::Real => &[],
    };
    turns.push(Turn::new(Role::Assistant, render_answer(sample.label, boxes)));
    Ok(Trajectory::new(sample.sample_id.clone(), turns)?)
}

/// Corpus-level bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuildReport {
    pub samples: usize,
    pub kept: usize,
    pub rejected: usize,
    /// Manifest samples without a score record; skipped.
    pub unscored: usize,
    pub trajectories_real: usize,
    pub trajectories_fake: usize,
    /// Number of calls to each tool across the emitted trajectories.
    pub tool_usage: BTreeMap<ToolId, usize>,
}

/// Where a corpus build writes its output.
pub struct BuildSink<'w> {
    /// Receives one trajectory JSON line per synthesized path.
    pub corpus: &'w mut dyn Write,
    /// Directory for tool-output PNGs.
    pub artifact_dir: PathBuf,
    /// How trajectories refer to files in `artifact_dir`.
    pub artifact_prefix: String,
}

/// Runs both stages for every scored sample, in manifest order.
pub fn build_corpus(
    scores: &[SampleScoreRecord],
    manifest: &Manifest,
    cfg: &SelectionConfig,
    tool_args: &ToolArgs,
    sink: &mut BuildSink<'_>,
) -> Result<BuildReport, TrajectoryError> {
    cfg.validate()?;
    let mut by_id: HashMap<&str, &SampleScoreRecord> = HashMap::with_capacity(scores.len());
    for s in scores {
        s.validate()?;
        let entry = manifest.get(&s.sample_id).ok_or_else(|| {
            TrajectoryError::ManifestMismatch(format!("scored sample {} not in manifest", s.sample_id))
        })?;
        if entry.label != s.label {
            return Err(TrajectoryError::ManifestMismatch(format!(
                "sample {}: score label {} but manifest label {}",
                s.sample_id, s.label, entry.label
            )));
        }
        if by_id.insert(s.sample_id.as_str(), s).is_some() {
            return Err(TrajectoryError::ManifestMismatch(format!(
                "sample {} scored twice",
                s.sample_id
            )));
        }
    }
    std::fs::create_dir_all(&sink.artifact_dir).map_err(|source| io_err(&sink.artifact_dir, source))?;

    let mut report = BuildReport {
        samples: manifest.len(),
        kept: 0,
        rejected: 0,
        unscored: 0,
        trajectories_real: 0,
        trajectories_fake: 0,
        tool_usage: ToolId::ALL.iter().map(|t| (*t, 0)).collect(),
    };
    for entry in manifest.entries() {
        let Some(score) = by_id.get(entry.sample_id.as_str()) else {
            report.unscored += 1;
            continue;
        };
        let ranking = match select_and_rank(score, cfg) {
            SelectionOutcome::Rejected => {
                report.rejected += 1;
                continue;
            }
            SelectionOutcome::Ranked(r) => r,
        };
        report.kept += 1;
        let plan = synthesize_paths(&entry.sample_id, &ranking, entry.label, cfg);
        let gt_boxes = match entry.label {
            Label::Fake => manifest.gt_boxes(entry)?,
            Label::Real => Vec::new(),
        };
        let mut sample = SampleArtifacts::new(&entry.sample_id, entry.label, gt_boxes, manifest.resolve(&entry.image))
            .with_tool_args(tool_args.clone())
            .with_output(&sink.artifact_dir, &sink.artifact_prefix);
        for path in &plan.paths {
            let t = materialize_trajectory(path, &mut sample)?;
            let line = serialize_trajectory(&t);
            writeln!(sink.corpus, "{line}").map_err(|source| io_err(Path::new("<corpus>"), source))?;
            match entry.label {
                Label::Real => report.trajectories_real += 1,
                Label::Fake => report.trajectories_fake += 1,
            }
            for tool in path {
                *report.tool_usage.entry(*tool).or_default() += 1;
            }
        }
    }
    Ok(report)
}

fn io_err(path: &Path, source: std::io::Error) -> TrajectoryError {
    TrajectoryError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::ManifestEntry;
    use crate::parser::{parse_tool_call, parse_trajectory, tool_call_spans};
    use crate::synth::photo_texture;

    fn bb(x1: u32, y1: u32, x2: u32, y2: u32) -> BoundingBox {
        BoundingBox::new(x1, y1, x2, y2).unwrap()
    }

    #[test]
    fn direct_real_path_is_two_turns() {
        let mut s = SampleArtifacts::new("r", Label::Real, vec![], "r.png");
        let t = materialize_trajectory(&[], &mut s).unwrap();
        assert_eq!(t.turns().len(), 2);
        assert_eq!(t.turns()[1].content, "<answer>real</answer>");
        assert_eq!(t.turns()[0].images, vec!["r.png".to_string()]);
        assert_eq!(t.final_label(), Some(Label::Real));
    }

    #[test]
    fn fake_answer_carries_box_tokens() {
        let mut s = SampleArtifacts::new("f", Label::Fake, vec![bb(10, 20, 30, 40)], "f.png")
            .with_image(photo_texture(64, 64, 1));
        let t = materialize_trajectory(&[ToolId::Ela], &mut s).unwrap();
        assert_eq!(t.turns().len(), 4);
        assert!(t.turns()[3].content.contains("<|box_start|>10,20,30,40<|box_end|>"));
        assert_eq!(t.tool_sequence(), vec![ToolId::Ela]);
        assert_eq!(t.turns()[2].images, vec!["f_ELA.png".to_string()]);
        assert_eq!(parse_trajectory(&serialize_trajectory(&t)).unwrap(), t);
    }

    #[test]
    fn zoom_bbox_is_expanded_union() {
        let gt = vec![bb(40, 50, 60, 70), bb(55, 45, 81, 66)];
        let mut s = SampleArtifacts::new("z", Label::Fake, gt, "z.png").with_image(photo_texture(100, 90, 2));
        let t = materialize_trajectory(&[ToolId::ZoomIn], &mut s).unwrap();
        // Union (40,45)-(81,70): 41x25, margins ceil(4.1)=5 and ceil(2.5)=3.
        let (ux1, uy1, ux2, uy2) = (40i64, 45i64, 81i64, 70i64);
        let mx = ((ux2 - ux1) as f64 * 0.1).ceil() as i64;
        let my = ((uy2 - uy1) as f64 * 0.1).ceil() as i64;
        let expected = [
            (ux1 - mx).max(0),
            (uy1 - my).max(0),
            (ux2 + mx).min(100),
            (uy2 + my).min(90),
        ];
        assert_eq!(expected, [35, 42, 86, 73]);
        assert_eq!(t.turns()[1].tool_calls[0].bbox, Some(expected));
        let wire = serialize_trajectory(&t);
        let parsed = parse_trajectory(&wire).unwrap();
        let span = tool_call_spans(&parsed.turns()[1].tool_calls[0].to_span())
            .next()
            .unwrap()
            .to_string();
        assert_eq!(parse_tool_call(&span).unwrap().bbox, Some(expected));
    }

    #[test]
    fn zoom_region_clamps_at_borders() {
        assert_eq!(zoom_region(&[bb(0, 0, 10, 10)], 12, 12), Some(bb(0, 0, 11, 11)));
        assert_eq!(zoom_region(&[], 12, 12), None);
    }

    #[test]
    fn real_zoom_uses_full_frame() {
        let mut s = SampleArtifacts::new("r", Label::Real, vec![], "r.png").with_image(photo_texture(48, 40, 3));
        let t = materialize_trajectory(&[ToolId::ZoomIn], &mut s).unwrap();
        assert_eq!(t.turns()[1].tool_calls[0].bbox, Some([0, 0, 48, 40]));
    }

    #[test]
    fn fake_without_boxes_errors() {
        let mut s = SampleArtifacts::new("f", Label::Fake, vec![], "f.png");
        assert!(matches!(
            materialize_trajectory(&[], &mut s),
            Err(TrajectoryError::MissingGtBox(_))
        ));
    }

    fn fixture_manifest(dir: &Path, n: usize) -> Manifest {
        let entries = (0..n)
            .map(|i| {
                let name = format!("img_{i}.png");
                photo_texture(48, 48, i as u64).save(dir.join(&name)).unwrap();
                let fake = i % 2 == 1;
                ManifestEntry {
                    sample_id: format!("s{i:03}"),
                    image: name.into(),
                    label: if fake { Label::Fake } else { Label::Real },
                    mask: None,
                    boxes: fake.then(|| vec![bb(8, 8, 24, 24)]),
                    dataset: None,
                }
            })
            .collect();
        Manifest::new(dir, entries).unwrap()
    }

    fn build(scores: &[SampleScoreRecord], manifest: &Manifest, dir: &Path) -> (BuildReport, String) {
        let mut corpus = Vec::new();
        let mut sink = BuildSink {
            corpus: &mut corpus,
            artifact_dir: dir.join("artifacts"),
            artifact_prefix: "artifacts/".into(),
        };
        let report = build_corpus(
            scores,
            manifest,
            &SelectionConfig::default(),
            &ToolArgs::default(),
            &mut sink,
        )
        .unwrap();
        (report, String::from_utf8(corpus).unwrap())
    }

    fn score(id: &str, label: Label, p_base: f64, tools: &[(ToolId, f64)]) -> SampleScoreRecord {
        SampleScoreRecord {
            sample_id: id.into(),
            label,
            p_base,
            tool_scores: tools.iter().copied().collect(),
        }
    }

    #[test]
    fn all_rejected_gives_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let m = fixture_manifest(dir.path(), 2);
        let scores = vec![
            score("s000", Label::Real, 0.1, &[(ToolId::Ela, 0.2)]),
            score("s001", Label::Fake, 0.3, &[]),
        ];
        let (report, corpus) = build(&scores, &m, dir.path());
        assert_eq!(report.rejected, 2);
        assert_eq!(report.kept, 0);
        assert!(corpus.is_empty());
    }

    #[test]
    fn three_tool_fake_sample_gives_six_lines() {
        let dir = tempfile::tempdir().unwrap();
        let m = fixture_manifest(dir.path(), 2);
        let scores = vec![score(
            "s001",
            Label::Fake,
            0.2,
            &[(ToolId::Ela, 0.9), (ToolId::Npp, 0.8), (ToolId::ZoomIn, 0.7)],
        )];
        let (report, corpus) = build(&scores, &m, dir.path());
        assert_eq!(corpus.lines().count(), 6);
        assert_eq!((report.unscored, report.trajectories_fake), (1, 6));
        assert_eq!(report.tool_usage[&ToolId::Ela], 3);
        assert_eq!(report.tool_usage[&ToolId::ZoomIn], 2);
        for tool in ["ELA", "NPP", "zoom_in"] {
            assert!(dir.path().join(format!("artifacts/s001_{tool}.png")).exists());
        }
        let parsed: Vec<Trajectory> = corpus.lines().map(|l| parse_trajectory(l).unwrap()).collect();
        assert_eq!(
            parsed[5].tool_sequence(),
            vec![ToolId::Ela, ToolId::Npp, ToolId::ZoomIn]
        );
    }

    #[test]
    fn mismatches_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let m = fixture_manifest(dir.path(), 2);
        let mut corpus = Vec::new();
        let mut sink = BuildSink {
            corpus: &mut corpus,
            artifact_dir: dir.path().join("a"),
            artifact_prefix: String::new(),
        };
        let cfg = SelectionConfig::default();
        let args = ToolArgs::default();
        for bad in [
            vec![score("nope", Label::Real, 0.9, &[])],
            vec![score("s000", Label::Fake, 0.9, &[])],
            vec![
                score("s000", Label::Real, 0.9, &[]),
                score("s000", Label::Real, 0.9, &[]),
            ],
        ] {
            let err = build_corpus(&bad, &m, &cfg, &args, &mut sink).unwrap_err();
            assert!(matches!(err, TrajectoryError::ManifestMismatch(_)), "{err}");
        }
    }

    /// Scripted scores for sample `i`, drawn from a small LCG.
    fn scripted(i: usize) -> (f64, Vec<(ToolId, f64)>) {
        let mut state = (i as u64).wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 40) % 11) as f64 / 10.0
        };
        let p_base = next() * 0.6;
        let tools = ToolId::ALL.iter().map(|t| (*t, next() * 0.8)).collect();
        (p_base, tools)
    }

    #[test]
    fn hundred_sample_histogram_matches_counting_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let m = fixture_manifest(dir.path(), 100);
        let scores: Vec<SampleScoreRecord> = m
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let (p, t) = scripted(i);
                score(&e.sample_id, e.label, p, &t)
            })
            .collect();
        let (report, corpus) = build(&scores, &m, dir.path());

        // Oracle: count directly from scores. A tool at rank r (1-based) within
        // the first K' appears in its singleton path plus every prefix path of
        // length max(2, r)..=K'.
        let (mut kept, mut rejected, mut real_n, mut fake_n) = (0, 0, 0, 0);
        let mut usage: BTreeMap<ToolId, usize> = ToolId::ALL.iter().map(|t| (*t, 0)).collect();
        for (i, e) in m.entries().iter().enumerate() {
            let (p, tools) = scripted(i);
            if tools.iter().all(|(_, s)| *s < 0.5) && p < 0.5 {
                rejected += 1;
                continue;
            }
            kept += 1;
            let bar = if p > 0.5 { p } else { 0.5 };
            let mut winners: Vec<(ToolId, f64)> = tools.into_iter().filter(|(_, s)| *s > bar).collect();
            winners.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let k = if e.label == Label::Fake { 4 } else { 2 };
            let kp = winners.len().min(k);
            let n_paths = if kp == 0 { 1 } else { 2 * kp };
            if e.label == Label::Fake {
                fake_n += n_paths;
            } else {
                real_n += n_paths;
            }
            for (r, (tool, _)) in winners.iter().take(kp).enumerate() {
                let rank = r + 1;
                let prefixes = (kp + 1).saturating_sub(rank.max(2));
                *usage.get_mut(tool).unwrap() += 1 + prefixes;
            }
        }
        assert_eq!(report.kept, kept);
        assert_eq!(report.rejected, rejected);
        assert_eq!(report.trajectories_real, real_n);
        assert_eq!(report.trajectories_fake, fake_n);
        assert_eq!(report.tool_usage, usage);
        assert_eq!(corpus.lines().count(), real_n + fake_n);
        assert!(kept > 20 && rejected > 5, "fixture exercises both branches");

        // Deterministic: a second build is byte-identical.
        let (report2, corpus2) = build(&scores, &m, dir.path());
        assert_eq!((report, corpus), (report2, corpus2));
    }
}
