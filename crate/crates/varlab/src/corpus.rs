//! Corpus files: one JSON video per line,
//! `{"id", "frames", "label", "category"?, "anomaly"?: {"start", "end"}}`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use varlab_core::corpus::{Category, Label, SyntheticVideo, TemporalInterval, WeakExample};

use crate::jsonl::{self, format_error};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VideoRecord {
    pub id: String,
    pub frames: Vec<u32>,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly: Option<Span>,
}

impl From<&SyntheticVideo> for VideoRecord {
    fn from(v: &SyntheticVideo) -> Self {
        Self {
            id: v.id().into(),
            frames: v.frames().to_vec(),
            label: v.label(),
            category: v.category(),
            anomaly: v.anomaly().map(|iv| Span {
                start: iv.start(),
                end: iv.end(),
            }),
        }
    }
}

impl From<&WeakExample> for VideoRecord {
    fn from(v: &WeakExample) -> Self {
        Self {
            id: v.id().into(),
            frames: v.frames().to_vec(),
            label: v.label(),
            category: None,
            anomaly: None,
        }
    }
}

pub fn write_corpus(path: &Path, videos: &[SyntheticVideo]) -> Result<()> {
    jsonl::write(path, videos.iter().map(VideoRecord::from))
}

pub fn write_weak_corpus(path: &Path, examples: &[WeakExample]) -> Result<()> {
    jsonl::write(path, examples.iter().map(VideoRecord::from))
}

fn read_records(path: &Path) -> Result<Vec<jsonl::Line<VideoRecord>>> {
    let lines = jsonl::read::<VideoRecord>(path)?;
    if lines.is_empty() {
        return Err(format_error(path, 1, 0, "corpus has no records"));
    }
    let mut seen = HashSet::new();
    for l in &lines {
        if l.value.frames.is_empty() {
            return Err(format_error(path, l.line, l.offset, format!("video {} has no frames", l.value.id)));
        }
        if !seen.insert(l.value.id.as_str()) {
            return Err(format_error(path, l.line, l.offset, format!("duplicate id {}", l.value.id)));
        }
    }
    Ok(lines)
}

/// Reads a fully annotated corpus. Abnormal records without a category and
/// interval are rejected, so a weak-label file cannot be used here.
pub fn read_corpus(path: &Path) -> Result<Vec<SyntheticVideo>> {
    read_records(path)?
        .into_iter()
        .map(|l| {
            let r = l.value;
            let fail = |m: String| format_error(path, l.line, l.offset, m);
            if r.label.is_abnormal() && (r.anomaly.is_none() || r.category.is_none()) {
                return Err(fail(format!(
                    "video {} is Abnormal but lacks category/anomaly annotations (weak-label corpus?)",
                    r.id
                )));
            }
            let anomaly = match r.anomaly {
                Some(s) => Some(TemporalInterval::new(s.start, s.end).map_err(|e| fail(e.to_string()))?),
                None => None,
            };
            SyntheticVideo::new(r.id, r.frames, r.label, r.category, anomaly).map_err(|e| fail(e.to_string()))
        })
        .collect()
}

/// Reads the weak-label view of any corpus file; annotations, if present,
/// are dropped on the floor.
pub fn read_weak_corpus(path: &Path) -> Result<Vec<WeakExample>> {
    Ok(read_records(path)?
        .into_iter()
        .map(|l| WeakExample::new(l.value.id, l.value.frames, l.value.label))
        .collect())
}

/// Largest token id in any video, for dimension checks.
pub fn max_token<'a>(frames: impl IntoIterator<Item = &'a [u32]>) -> Option<u32> {
    frames.into_iter().flat_map(|f| f.iter().copied()).max()
}

/// Label counts `(normal, abnormal)`.
pub fn label_split(labels: impl IntoIterator<Item = Label>) -> (usize, usize) {
    labels.into_iter().fold((0, 0), |(n, a), l| match l {
        Label::Normal => (n + 1, a),
        Label::Abnormal => (n, a + 1),
    })
}
