//! Supervised pre-fit: maximum likelihood on ground-truth decisions.

use alloc::vec;
use alloc::vec::Vec;

use super::sample::{accumulate_grad_logprob, component_logprobs};
use super::{Decisions, Observation, PolicyConfig, PolicyParams, Verbosity};
use crate::corpus::{iou, uniform_sample, SyntheticVideo, TemporalInterval, TimelineMap};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SftConfig {
    pub steps: usize,
    pub lr: f64,
    /// When false the segment head receives no supervision, leaving interval
    /// learning entirely to the RL stage.
    pub supervise_segment: bool,
}

impl Default for SftConfig {
    fn default() -> Self {
        Self {
            steps: 500,
            lr: 0.5,
            supervise_segment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SftOutcome {
    pub params: PolicyParams,
    /// Mean negative log-likelihood before each step and after the last one.
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SftError {
    #[error("supervised fit needs at least one labeled video")]
    Empty,
    #[error("learning rate must be finite and nonnegative, got {0}")]
    InvalidLearningRate(f64),
}

/// Candidate on the observed timeline whose source-frame span has the
/// highest IoU with `truth`; ties go to the earliest candidate.
pub fn best_candidate(config: &PolicyConfig, duration: usize, truth: &TemporalInterval) -> usize {
    let map = TimelineMap::new(config.frames, duration);
    let cands = super::candidates(config.frames, config.bins);
    let mut best = (0, f64::NEG_INFINITY);
    for (k, c) in cands.iter().enumerate() {
        let score = iou(&map.to_source(c), truth);
        if score > best.1 {
            best = (k, score);
        }
    }
    best.0
}

/// Observation and target decisions for one annotated video: the true class,
/// the best-matching candidate, medium verbosity and a well-formed answer.
pub fn sft_targets(config: &PolicyConfig, video: &SyntheticVideo) -> (Observation, Decisions) {
    let obs = Observation::new(config, &uniform_sample(video.frames(), config.frames));
    let segment = video
        .anomaly()
        .map(|gt| best_candidate(config, video.duration(), &gt));
    let decisions = Decisions {
        class: video.label(),
        segment,
        verbosity: Verbosity::Medium,
        wellformed: true,
    };
    (obs, decisions)
}

fn mean_nll(params: &PolicyParams, batch: &[(Observation, Decisions)], with_segment: bool) -> f64 {
    let total: f64 = batch
        .iter()
        .map(|(obs, d)| {
            let lp = component_logprobs(params, obs, d);
            let seg = if with_segment { lp.segment.unwrap_or(0.0) } else { 0.0 };
            -(lp.class + seg + lp.verbosity + lp.wellformed)
        })
        .sum();
    total / batch.len() as f64
}

/// Full-batch gradient ascent on the mean log-likelihood. The input is left
/// untouched.
pub fn sft_fit(params: &PolicyParams, videos: &[SyntheticVideo], cfg: &SftConfig) -> Result<SftOutcome, SftError> {
    if videos.is_empty() {
        return Err(SftError::Empty);
    }
    if !(cfg.lr >= 0.0 && cfg.lr.is_finite()) {
        return Err(SftError::InvalidLearningRate(cfg.lr));
    }
    let config = *params.config();
    let batch: Vec<_> = videos.iter().map(|v| sft_targets(&config, v)).collect();
    let mut params = params.clone();
    let seg_block = params.layout().seg();
    let scale = 1.0 / batch.len() as f64;
    let mut losses = Vec::with_capacity(cfg.steps + 1);
    let mut grad = vec![0.0; params.values().len()];
    for _ in 0..cfg.steps {
        losses.push(mean_nll(&params, &batch, cfg.supervise_segment));
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (obs, d) in &batch {
            accumulate_grad_logprob(&params, obs, d, scale, &mut grad);
        }
        if !cfg.supervise_segment {
            grad[seg_block.clone()].iter_mut().for_each(|g| *g = 0.0);
        }
        params.add_scaled(&grad, cfg.lr);
    }
    losses.push(mean_nll(&params, &batch, cfg.supervise_segment));
    Ok(SftOutcome { params, losses })
}
