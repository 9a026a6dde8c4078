use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use vcrkit::manifest::{read_jsonl_file, Manifest};
use vcrkit::trajectory::{build_corpus, BuildSink, SampleScoreRecord, SelectionConfig};

use super::{create, required, tool_args, write_text, BuildTrajArgs};

pub fn run(a: BuildTrajArgs) -> Result<()> {
    let scores_path = required(&a.scores, "scores")?;
    let manifest = Manifest::load(required(&a.manifest, "manifest")?)?;
    let out = required(&a.out, "out")?;
    let defaults = SelectionConfig::default();
    let cfg = SelectionConfig {
        tau: a.tau.unwrap_or(defaults.tau),
        k_fake: a.k_fake.unwrap_or(defaults.k_fake),
        k_real: a.k_real.unwrap_or(defaults.k_real),
    };
    let args = tool_args(
        a.quality,
        a.amplification,
        a.fft_mode.as_deref(),
        a.block_size,
        a.radial_cutoff,
        a.min_side,
    )?;

    let scores: Vec<SampleScoreRecord> = read_jsonl_file(&scores_path)
        .with_context(|| format!("reading {}", scores_path.display()))?
        .into_iter()
        .map(|(_, r)| r)
        .collect();

    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    let out_dir = out.parent().map(PathBuf::from).unwrap_or_default();
    let artifacts = format!("{stem}_artifacts");
    let report_path = a
        .report
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{stem}.report.json")));

    let mut corpus = create(&out)?;
    let mut sink = BuildSink {
        corpus: &mut corpus,
        artifact_dir: out_dir.join(&artifacts),
        artifact_prefix: format!("{artifacts}/"),
    };
    let report = build_corpus(&scores, &manifest, &cfg, &args, &mut sink)?;
    corpus.flush()?;

    let text = serde_json::to_string_pretty(&report)?;
    write_text(&report_path, &format!("{text}\n"))?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
