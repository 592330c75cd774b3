use alloc::string::String;

use crate::policy::{ABNORMAL_LENGTH_RANGE, NORMAL_LENGTH_RANGE};

/// Which class selects the length range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LengthKey {
    /// The class the completion predicts.
    Predicted,
    /// The video's weak label.
    WeakLabel,
}

/// Reward components that can be switched off for ablations. Accuracy and
/// format are always on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RewardSwitches {
    pub verification: bool,
    pub length: bool,
}

impl Default for RewardSwitches {
    fn default() -> Self {
        Self {
            verification: true,
            length: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub group_size: usize,
    pub beta: f64,
    pub lr: f64,
    pub epochs: usize,
    /// Stops after this many updates even if epochs remain.
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub max_steps: Option<usize>,
    pub std_floor: f64,
    pub trim_fraction: f64,
    pub normal_range: (usize, usize),
    pub abnormal_range: (usize, usize),
    /// Parsed for completeness; the single-update objective never clips.
    pub clip_epsilon: f64,
    pub length_key: LengthKey,
    pub rewards: RewardSwitches,
    /// Reshuffle the corpus at the start of every epoch.
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            group_size: 4,
            beta: 0.04,
            lr: 1e-6,
            epochs: 1,
            max_steps: None,
            std_floor: 1e-8,
            trim_fraction: 0.25,
            normal_range: NORMAL_LENGTH_RANGE,
            abnormal_range: ABNORMAL_LENGTH_RANGE,
            clip_epsilon: 0.2,
            length_key: LengthKey::Predicted,
            rewards: RewardSwitches::default(),
            shuffle: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Returns the offending field name and reason.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let bad = |f: &'static str, r: &str| Err((f, r.into()));
        if self.group_size < 2 {
            return bad("group_size", "must be at least 2");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta", "must be finite and nonnegative");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr", "must be finite and nonnegative");
        }
        if !(self.std_floor > 0.0 && self.std_floor.is_finite()) {
            return bad("std_floor", "must be positive");
        }
        if !(self.trim_fraction > 0.0 && self.trim_fraction < 1.0) {
            return bad("trim_fraction", "must lie strictly between 0 and 1");
        }
        if self.normal_range.0 > self.normal_range.1 {
            return bad("normal_range", "empty range");
        }
        if self.abnormal_range.0 > self.abnormal_range.1 {
            return bad("abnormal_range", "empty range");
        }
        if !(self.clip_epsilon >= 0.0 && self.clip_epsilon.is_finite()) {
            return bad("clip_epsilon", "must be finite and nonnegative");
        }
        Ok(())
    }
}
