//! JSONL inputs shared by the pipelines: the sample manifest, prediction
//! files and completion files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::evalkit::mask_to_boxes;
use crate::geometry::BoundingBox;
use crate::raster::{BinaryMask, RasterError};
use crate::Label;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("DuplicateSample: {0}")]
    DuplicateSample(String),
    #[error("MissingGroundTruth: fake sample {0} has neither mask nor boxes")]
    MissingGroundTruth(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Reads one JSON value per non-blank line; errors carry 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<(usize, T)>, ManifestError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ManifestError::Invalid {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| ManifestError::Json { line: line_no, source })?;
        out.push((line_no, value));
    }
    Ok(out)
}

/// [`read_jsonl`] over a file path.
pub fn read_jsonl_file<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<(usize, T)>, ManifestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_jsonl(BufReader::new(file))
}

/// One labelled sample. Paths are stored as written; use
/// [`Manifest::resolve`] to interpret them relative to the manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub sample_id: String,
    pub image: PathBuf,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Vec<BoundingBox>>,
    /// Grouping key for per-dataset reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    base_dir: PathBuf,
    entries: Vec<ManifestEntry>,
    index: HashMap<String, usize>,
}

impl Manifest {
    /// Validates ids are unique and every fake entry carries a mask or boxes.
    pub fn new(base_dir: impl Into<PathBuf>, entries: Vec<ManifestEntry>) -> Result<Self, ManifestError> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            if index.insert(e.sample_id.clone(), i).is_some() {
                return Err(ManifestError::DuplicateSample(e.sample_id.clone()));
            }
            if e.label == Label::Fake && e.mask.is_none() && e.boxes.as_ref().is_none_or(|b| b.is_empty()) {
                return Err(ManifestError::MissingGroundTruth(e.sample_id.clone()));
            }
        }
        Ok(Self {
            base_dir: base_dir.into(),
            entries,
            index,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ManifestError> {
        let path = path.as_ref();
        let entries = read_jsonl_file::<ManifestEntry>(path)?
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(base, entries)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, sample_id: &str) -> Option<&ManifestEntry> {
        self.index.get(sample_id).map(|&i| &self.entries[i])
    }

    /// Interprets a manifest path relative to the manifest's directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn load_mask(&self, entry: &ManifestEntry) -> Result<Option<BinaryMask>, ManifestError> {
        entry
            .mask
            .as_ref()
            .map(|m| BinaryMask::load(self.resolve(m)))
            .transpose()
            .map_err(Into::into)
    }

    /// Explicit boxes when present, otherwise the boxes extracted from the mask.
    pub fn gt_boxes(&self, entry: &ManifestEntry) -> Result<Vec<BoundingBox>, ManifestError> {
        if let Some(b) = &entry.boxes {
            return Ok(b.clone());
        }
        Ok(self.load_mask(entry)?.map(|m| mask_to_boxes(&m)).unwrap_or_default())
    }
}

/// Model output for one sample in a predictions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    #[serde(default)]
    pub pred_label: Option<Label>,
    #[serde(default)]
    pub boxes: Vec<BoundingBox>,
    #[serde(default)]
    pub mask: Option<PathBuf>,
}

/// One sampled completion for reward scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRecord {
    pub sample_id: String,
    pub completion: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn reads_entries_and_resolves_paths() {
        let text = r#"{"sample_id":"a","image":"img/a.png","label":"real"}

{"sample_id":"b","image":"/abs/b.png","label":"fake","boxes":[[1,2,3,4]],"dataset":"casia"}
"#;
        let rows: Vec<(usize, ManifestEntry)> = read_jsonl(Cursor::new(text)).unwrap();
        assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 3]);
        let m = Manifest::new("/data", rows.into_iter().map(|r| r.1).collect()).unwrap();
        let a = m.get("a").unwrap();
        assert_eq!(m.resolve(&a.image), PathBuf::from("/data/img/a.png"));
        let b = m.get("b").unwrap();
        assert_eq!(m.resolve(&b.image), PathBuf::from("/abs/b.png"));
        assert_eq!(m.gt_boxes(b).unwrap(), vec![BoundingBox::new(1, 2, 3, 4).unwrap()]);
        assert_eq!(b.dataset.as_deref(), Some("casia"));
        assert!(m.gt_boxes(a).unwrap().is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "{\"sample_id\":\"a\",\"image\":\"x\",\"label\":\"real\"}\n{not json\n";
        let err = read_jsonl::<ManifestEntry>(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, ManifestError::Json { line: 2, .. }));
        let bad_box = r#"{"sample_id":"a","image":"x","label":"fake","boxes":[[5,5,5,9]]}"#;
        assert!(matches!(
            read_jsonl::<ManifestEntry>(Cursor::new(bad_box)),
            Err(ManifestError::Json { line: 1, .. })
        ));
    }

    #[test]
    fn validation() {
        let e = |id: &str, label, boxes: Option<Vec<BoundingBox>>| ManifestEntry {
            sample_id: id.into(),
            image: "x.png".into(),
            label,
            mask: None,
            boxes,
            dataset: None,
        };
        assert!(matches!(
            Manifest::new("", vec![e("a", Label::Real, None), e("a", Label::Real, None)]),
            Err(ManifestError::DuplicateSample(_))
        ));
        assert!(matches!(
            Manifest::new("", vec![e("f", Label::Fake, None)]),
            Err(ManifestError::MissingGroundTruth(_))
        ));
        assert!(matches!(
            Manifest::new("", vec![e("f", Label::Fake, Some(vec![]))]),
            Err(ManifestError::MissingGroundTruth(_))
        ));
    }

    #[test]
    fn boxes_from_mask_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut mask = BinaryMask::empty(64, 64).unwrap();
        for y in 10..30 {
            for x in 20..40 {
                mask.set(x, y, true);
            }
        }
        mask.save_png(dir.path().join("m.png")).unwrap();
        let entry = ManifestEntry {
            sample_id: "f".into(),
            image: "f.png".into(),
            label: Label::Fake,
            mask: Some("m.png".into()),
            boxes: None,
            dataset: None,
        };
        let m = Manifest::new(dir.path(), vec![entry.clone()]).unwrap();
        assert_eq!(
            m.gt_boxes(&entry).unwrap(),
            vec![BoundingBox::new(20, 10, 40, 30).unwrap()]
        );
    }

    #[test]
    fn prediction_defaults() {
        let p: PredictionRecord = serde_json::from_str(r#"{"sample_id":"x"}"#).unwrap();
        assert_eq!(p.pred_label, None);
        assert!(p.boxes.is_empty() && p.mask.is_none());
    }
}
