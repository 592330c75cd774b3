//! Factorized stochastic policy over structured completions.
//!
//! A completion is four independent-given-class decisions:
//!
//! 1. class: logistic on a token histogram of the observed window;
//! 2. segment (abnormal only): softmax over all contiguous bin spans, scored
//!    by the histogram inside and outside the span plus its endpoints;
//! 3. verbosity: one 3-way softmax per class;
//! 4. well-formedness: a single logistic.
//!
//! Every log-probability is exact and every gradient analytic, so the policy
//! can stand in for a language model in the optimizer without hiding any
//! numerics. The surface text is rendered from templates; the category named
//! in the answer is read off the tokens inside the chosen span.

mod observation;
mod params;
mod render;
pub(crate) mod sample;
mod sft;

use crate::corpus::{CorpusError, Vocabulary};

pub use observation::{candidates, features_cls, Observation};
pub use params::{snapshot, Layout, PolicyParams, Reference};
pub use render::{render, target_words, ABNORMAL_LENGTH_RANGE, NORMAL_LENGTH_RANGE};
pub use sample::{
    complete, component_logprobs,
    decode_greedy, enumerate_decisions, grad_logprob, logprob, sample, sample_decisions, Completion, ComponentLogProbs, DecisionTrace,
    Decisions, Verbosity,
};
pub use sft::{best_candidate, sft_fit, sft_targets, SftConfig, SftError, SftOutcome};

/// Which part of the observed frames the class decision may look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    Full,
    /// Only the first `m` observed frames.
    Prefix(usize),
}

/// Shape of a policy: vocabulary size, candidate bins, number of observed
/// frames and the class observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyConfig {
    pub vocab_size: usize,
    pub bins: usize,
    pub frames: usize,
    pub mode: ObservationMode,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            vocab_size: 16,
            bins: 8,
            frames: 16,
            mode: ObservationMode::Full,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let bad = |field, reason: &str| {
            Err(CorpusError::InvalidSpec {
                field,
                reason: reason.into(),
            })
        };
        Vocabulary::new(self.vocab_size)?;
        if self.bins == 0 {
            return bad("bins", "must be positive");
        }
        if self.frames < self.bins {
            return bad("frames", "must be at least the number of bins");
        }
        if let ObservationMode::Prefix(m) = self.mode {
            if m == 0 || m > self.frames {
                return bad("prefix_len", "must lie in 1..=frames");
            }
        }
        Ok(())
    }

    pub fn vocabulary(&self) -> Vocabulary {
        Vocabulary::new(self.vocab_size).expect("validated vocabulary size")
    }

    pub fn n_candidates(&self) -> usize {
        self.bins * (self.bins + 1) / 2
    }
}
