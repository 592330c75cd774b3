use rand::Rng;

use super::{LengthKey, TrainConfig};
use crate::corpus::{discard_random_end, discard_segment, uniform_sample, Label, TimelineMap, WeakExample};
use crate::cot::{extract_verdict, think_word_count, validate_format, CoTDocument, Verdict};
use crate::policy::{sample, Observation, PolicyParams};

pub const ANO_CONFIRMED: f64 = 0.5;
pub const ANO_CONTRADICTED: f64 = -0.2;
pub const LENGTH_BONUS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RewardBreakdown {
    pub acc: f64,
    pub fmt: f64,
    pub ano: f64,
    pub len: f64,
}

impl RewardBreakdown {
    pub fn total(&self) -> f64 {
        self.acc + self.fmt + self.ano + self.len
    }
}

/// Result of re-querying the policy on a trimmed video.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerificationOutcome {
    /// Abnormal claim; removing the claimed span flipped the answer to Normal.
    Confirmed,
    /// Normal claim; cutting one end flipped the answer to Abnormal.
    Contradicted,
    /// No flip, no verdict, or the video could not be trimmed.
    Neutral,
}

impl VerificationOutcome {
    pub fn reward(self) -> f64 {
        match self {
            VerificationOutcome::Confirmed => ANO_CONFIRMED,
            VerificationOutcome::Contradicted => ANO_CONTRADICTED,
            VerificationOutcome::Neutral => 0.0,
        }
    }
}

/// 1 when the extracted verdict matches the weak label.
pub fn accuracy_reward(verdict: Option<&Verdict>, label: Label) -> f64 {
    match verdict {
        Some(v) if v.prediction() == label => 1.0,
        _ => 0.0,
    }
}

/// 1 when `text` passes strict format validation.
pub fn format_reward(text: &str) -> f64 {
    if validate_format(text).valid {
        1.0
    } else {
        0.0
    }
}

/// Bonus when the think section's word count falls inside the closed range
/// for `class`. Unparseable completions get nothing.
pub fn length_reward(doc: Option<&CoTDocument>, class: Label, cfg: &TrainConfig) -> f64 {
    let Some(doc) = doc else { return 0.0 };
    let (lo, hi) = match class {
        Label::Normal => cfg.normal_range,
        Label::Abnormal => cfg.abnormal_range,
    };
    let n = think_word_count(doc);
    if (lo..=hi).contains(&n) {
        LENGTH_BONUS
    } else {
        0.0
    }
}

/// Trims the raw video according to the completion's claim and asks the
/// current policy again.
///
/// The claimed interval is read on the observed timeline and mapped back to
/// raw frames before trimming. Only the weak example is consulted.
pub fn anomaly_verification_reward<R: Rng + ?Sized>(
    params: &PolicyParams,
    example: &WeakExample,
    text: &str,
    cfg: &TrainConfig,
    rng: &mut R,
) -> VerificationOutcome {
    let n = params.config().frames;
    let requery = |frames: &[u32], rng: &mut R| {
        let obs = Observation::new(params.config(), &uniform_sample(frames, n));
        extract_verdict(&sample(params, &obs, rng).text)
    };
    match extract_verdict(text) {
        Some(Verdict::Abnormal { interval, .. }) => {
            let span = TimelineMap::new(n, example.duration()).to_source(&interval);
            let Ok(trimmed) = discard_segment(example.frames(), &span) else {
                return VerificationOutcome::Neutral;
            };
            match requery(&trimmed, rng) {
                Some(Verdict::Normal) => VerificationOutcome::Confirmed,
                _ => VerificationOutcome::Neutral,
            }
        }
        Some(Verdict::Normal) => {
            let Ok((trimmed, _)) = discard_random_end(example.frames(), cfg.trim_fraction, rng) else {
                return VerificationOutcome::Neutral;
            };
            match requery(&trimmed, rng) {
                Some(v) if v.prediction().is_abnormal() => VerificationOutcome::Contradicted,
                _ => VerificationOutcome::Neutral,
            }
        }
        None => VerificationOutcome::Neutral,
    }
}

/// Scores one completion. `verification` is consulted only when the switch
/// is on.
pub(crate) fn score(
    text: &str,
    doc: Option<&CoTDocument>,
    label: Label,
    verification: VerificationOutcome,
    cfg: &TrainConfig,
) -> RewardBreakdown {
    let verdict = extract_verdict(text);
    let len_class = match cfg.length_key {
        LengthKey::Predicted => verdict.as_ref().map(Verdict::prediction),
        LengthKey::WeakLabel => Some(label),
    };
    RewardBreakdown {
        acc: accuracy_reward(verdict.as_ref(), label),
        fmt: format_reward(text),
        ano: if cfg.rewards.verification {
            verification.reward()
        } else {
            0.0
        },
        len: match (cfg.rewards.length, len_class) {
            (true, Some(c)) => length_reward(doc, c, cfg),
            _ => 0.0,
        },
    }
}
