//! Synthetic anomaly videos.
//!
//! A video is a sequence of frame tokens drawn from a small vocabulary. The
//! vocabulary is split into a background block and one block per anomaly
//! category; frames inside the anomaly interval mostly use the category's
//! block, frames outside mostly use the background block. A configurable
//! noise rate swaps blocks so the task is not separable frame by frame.

mod generate;
mod interval;
mod trim;
mod weak;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

pub use generate::{generate_corpus, CorpusSpec, Placement, PlacementWeights};
pub use interval::{iou, TemporalInterval, TimelineMap};
pub use trim::{discard_random_end, discard_segment, uniform_sample, TrimEnd, TrimError, Untrimmable};
pub use weak::{weak_view, WeakExample};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid interval [{start}, {end}): start must be below end")]
    EmptyInterval { start: usize, end: usize },
    #[error("invalid corpus spec: {field}: {reason}")]
    InvalidSpec { field: &'static str, reason: String },
    #[error("video {id}: {reason}")]
    InvalidVideo { id: String, reason: String },
}

/// Video-level label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    Normal,
    Abnormal,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "Normal",
            Label::Abnormal => "Abnormal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "Normal" => Some(Label::Normal),
            "Abnormal" => Some(Label::Abnormal),
            _ => None,
        }
    }

    #[inline]
    pub fn is_abnormal(self) -> bool {
        self == Label::Abnormal
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Label::Normal => 0,
            Label::Abnormal => 1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Coarse anomaly taxonomy: three human-activity, two environment and one
/// object category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Category {
    Fighting,
    Robbery,
    Shooting,
    Fire,
    Flood,
    TrafficAccident,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Fighting,
        Category::Robbery,
        Category::Shooting,
        Category::Fire,
        Category::Flood,
        Category::TrafficAccident,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Fighting => "Fighting",
            Category::Robbery => "Robbery",
            Category::Shooting => "Shooting",
            Category::Fire => "Fire",
            Category::Flood => "Flood",
            Category::TrafficAccident => "TrafficAccident",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short noun phrase used by the surface templates.
    pub fn phrase(self) -> &'static str {
        match self {
            Category::Fighting => "a physical fight between people",
            Category::Robbery => "a robbery in progress",
            Category::Shooting => "a person firing a weapon",
            Category::Fire => "an open fire spreading",
            Category::Flood => "water flooding the area",
            Category::TrafficAccident => "a collision between vehicles",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Token layout: `[0, background)` is background, followed by one block of
/// `per_category` tokens for each entry of [`Category::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vocabulary {
    size: usize,
    per_category: usize,
}

impl Vocabulary {
    pub const MIN_SIZE: usize = Category::ALL.len() + 1;

    pub fn new(size: usize) -> Result<Self, CorpusError> {
        if size < Self::MIN_SIZE {
            return Err(CorpusError::InvalidSpec {
                field: "vocab_size",
                reason: alloc::format!("must be at least {}", Self::MIN_SIZE),
            });
        }
        let per_category = ((size * 3 / 4) / Category::ALL.len()).max(1);
        Ok(Self { size, per_category })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn background(&self) -> Range<u32> {
        0..(self.size - self.per_category * Category::ALL.len()) as u32
    }

    pub fn category_tokens(&self, category: Category) -> Range<u32> {
        let start = self.background().end as usize + category.index() * self.per_category;
        start as u32..(start + self.per_category) as u32
    }

    pub fn anomaly_tokens(&self) -> Range<u32> {
        self.background().end..self.size as u32
    }

    pub fn category_of(&self, token: u32) -> Option<Category> {
        let bg = self.background().end;
        if token < bg || token as usize >= self.size {
            return None;
        }
        Category::ALL
            .get(((token - bg) as usize) / self.per_category)
            .copied()
    }
}

/// One synthetic video with full ground truth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticVideo {
    id: String,
    frames: Vec<u32>,
    label: Label,
    category: Option<Category>,
    anomaly: Option<TemporalInterval>,
}

impl SyntheticVideo {
    /// Checks the structural invariants: nonempty frames, annotations present
    /// exactly for abnormal videos, and the interval inside the video.
    pub fn new(
        id: impl Into<String>,
        frames: Vec<u32>,
        label: Label,
        category: Option<Category>,
        anomaly: Option<TemporalInterval>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let bad = |reason: &str| CorpusError::InvalidVideo {
            id: id.clone(),
            reason: reason.into(),
        };
        if frames.is_empty() {
            return Err(bad("no frames"));
        }
        match (label, category.is_some(), anomaly) {
            (Label::Normal, false, None) => {}
            (Label::Abnormal, true, Some(iv)) => {
                if iv.end() > frames.len() {
                    return Err(bad("anomaly interval extends past the last frame"));
                }
            }
            (Label::Normal, _, _) => return Err(bad("normal video carries anomaly annotations")),
            (Label::Abnormal, false, _) => return Err(bad("abnormal video without category")),
            (Label::Abnormal, true, None) => return Err(bad("abnormal video without interval")),
        }
        Ok(Self {
            id,
            frames,
            label,
            category,
            anomaly,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn frames(&self) -> &[u32] {
        &self.frames
    }

    pub fn duration(&self) -> usize {
        self.frames.len()
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn category(&self) -> Option<Category> {
        self.category
    }

    pub fn anomaly(&self) -> Option<TemporalInterval> {
        self.anomaly
    }
}
