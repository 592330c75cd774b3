use alloc::string::String;
use alloc::vec::Vec;

use super::{Label, SyntheticVideo};

/// Video-level weak label, the only supervision the RL stage sees.
pub fn weak_view(video: &SyntheticVideo) -> Label {
    video.label()
}

/// A video stripped to what the RL trainer may read: id, frames and the weak
/// label. Category and interval are not representable here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakExample {
    id: String,
    frames: Vec<u32>,
    label: Label,
}

impl WeakExample {
    /// # Panics
    /// If `frames` is empty.
    pub fn new(id: impl Into<String>, frames: Vec<u32>, label: Label) -> Self {
        assert!(!frames.is_empty(), "weak example needs frames");
        Self {
            id: id.into(),
            frames,
            label,
        }
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
}

impl From<&SyntheticVideo> for WeakExample {
    fn from(video: &SyntheticVideo) -> Self {
        Self {
            id: video.id().into(),
            frames: video.frames().to_vec(),
            label: weak_view(video),
        }
    }
}
