//! Scoring model outputs against ground truth.
//!
//! Text metrics tokenize by stripping tag markup, case-folding and splitting
//! on whitespace. Corpus-level text scores are per-video means. METEOR is the
//! reduced `meteor_lite` variant: exact then suffix-stem unigram matches, no
//! synonym tables.

mod classify;
mod grounding;
mod judge;
mod meteor;
mod report;
mod text;

pub use classify::{classification_metrics, ClassificationMetrics, MetricFlag};
pub use grounding::{grounding_metrics, GroundingMetrics, DEFAULT_THRESHOLDS};
pub use judge::{judge_prompt, parse_judge_reply, Aspect, JudgeReference, JudgeReplyError, JudgeScore};
pub use meteor::{meteor_lite, stem, METEOR_ALPHA, METEOR_BETA, METEOR_GAMMA};
pub use report::{evaluate, reference_text, EvalError, EvalSettings, MetricsReport, OutputRecord};
pub use text::{bleu_n, lcs_len, rouge_l, rouge_n, tokenize};
