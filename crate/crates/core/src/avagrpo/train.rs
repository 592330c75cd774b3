use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;

use super::rewards::score;
use super::{
    advantages, anomaly_verification_reward, kl_penalty, loss_and_grad, CompletionGroup, GroupMember, TrainConfig,
    VerificationOutcome,
};
use crate::corpus::{uniform_sample, WeakExample};
use crate::cot::think_word_count;
use crate::math::mean_std;
use crate::policy::{sample, snapshot, Observation, PolicyParams, Reference};
use crate::rng::{derive_seed, site, stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("example {id}: {reason}")]
    InvalidExample { id: String, reason: String },
    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite parameter {index} after step {step}")]
    NonFinite { step: usize, index: usize },
}

/// Per-update summary of one group.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub video_id: String,
    pub loss: f64,
    pub mean_total: f64,
    pub std_total: f64,
    pub mean_acc: f64,
    pub mean_fmt: f64,
    pub mean_ano: f64,
    pub mean_len: f64,
    pub mean_kl: f64,
    /// Mean think-section word count over parseable completions.
    pub mean_words: f64,
    pub ano_confirmed: usize,
    pub ano_contradicted: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<StepRecord>,
}

/// Samples, scores and normalizes one group for `example`.
///
/// Completion `i` of update `step` draws from its own substream, and so
/// does its verification re-query.
pub fn build_group(
    params: &PolicyParams,
    reference: &Reference,
    example: &WeakExample,
    cfg: &TrainConfig,
    step: usize,
) -> CompletionGroup {
    let observed = uniform_sample(example.frames(), params.config().frames);
    let obs = Observation::new(params.config(), &observed);
    let mut members: Vec<GroupMember> = (0..cfg.group_size)
        .map(|i| {
            let path = [step as u64, i as u64];
            let completion = sample(params, &obs, &mut stream(cfg.seed, &[site::GROUP, path[0], path[1]]));
            let verification = if cfg.rewards.verification {
                let mut rng = stream(cfg.seed, &[site::VERIFY, path[0], path[1]]);
                anomaly_verification_reward(params, example, &completion.text, cfg, &mut rng)
            } else {
                VerificationOutcome::Neutral
            };
            let rewards = score(&completion.text, completion.doc.as_ref(), example.label(), verification, cfg);
            let kl = kl_penalty(params, reference, &obs, &completion.trace.decisions);
            GroupMember {
                completion,
                verification,
                rewards,
                advantage: 0.0,
                kl,
            }
        })
        .collect();
    let totals: Vec<f64> = members.iter().map(|m| m.rewards.total()).collect();
    for (m, a) in members.iter_mut().zip(advantages(&totals, cfg.std_floor)) {
        m.advantage = a;
    }
    CompletionGroup {
        video_id: example.id().into(),
        observed,
        members,
    }
}

fn summarize(group: &CompletionGroup, step: usize, epoch: usize, loss: f64) -> StepRecord {
    let n = group.len().max(1) as f64;
    let mean = |f: &dyn Fn(&GroupMember) -> f64| group.members.iter().map(f).sum::<f64>() / n;
    let totals: Vec<f64> = group.members.iter().map(|m| m.rewards.total()).collect();
    let (mean_total, std_total) = mean_std(&totals);
    let words: Vec<f64> = group
        .members
        .iter()
        .filter_map(|m| m.completion.doc.as_ref().map(|d| think_word_count(d) as f64))
        .collect();
    let count = |o: VerificationOutcome| group.members.iter().filter(|m| m.verification == o).count();
    StepRecord {
        step,
        epoch,
        video_id: group.video_id.clone(),
        loss,
        mean_total,
        std_total,
        mean_acc: mean(&|m| m.rewards.acc),
        mean_fmt: mean(&|m| m.rewards.fmt),
        mean_ano: mean(&|m| m.rewards.ano),
        mean_len: mean(&|m| m.rewards.len),
        mean_kl: mean(&|m| m.kl),
        mean_words: if words.is_empty() {
            0.0
        } else {
            words.iter().sum::<f64>() / words.len() as f64
        },
        ano_confirmed: count(VerificationOutcome::Confirmed),
        ano_contradicted: count(VerificationOutcome::Contradicted),
    }
}

fn check_inputs(params: &PolicyParams, corpus: &[WeakExample], cfg: &TrainConfig) -> Result<(), TrainError> {
    cfg.validate()
        .map_err(|(field, reason)| TrainError::InvalidConfig { field, reason })?;
    if corpus.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let v = params.config().vocab_size;
    for ex in corpus {
        if ex.frames().is_empty() {
            return Err(TrainError::InvalidExample {
                id: ex.id().into(),
                reason: "no frames".into(),
            });
        }
        if let Some(t) = ex.frames().iter().find(|&&t| t as usize >= v) {
            return Err(TrainError::InvalidExample {
                id: ex.id().into(),
                reason: alloc::format!("token {t} outside vocabulary of {v}"),
            });
        }
    }
    Ok(())
}

/// Runs the optimizer and returns the final parameters and per-step log.
/// The reference policy is a frozen copy of `init`.
pub fn train(init: &PolicyParams, corpus: &[WeakExample], cfg: &TrainConfig) -> Result<(PolicyParams, TrainLog), TrainError> {
    train_with(init, corpus, cfg, &mut |_, _| {})
}

/// Like [`train`], calling `on_step` after every update.
pub fn train_with(
    init: &PolicyParams,
    corpus: &[WeakExample],
    cfg: &TrainConfig,
    on_step: &mut dyn FnMut(&StepRecord, &PolicyParams),
) -> Result<(PolicyParams, TrainLog), TrainError> {
    check_inputs(init, corpus, cfg)?;
    let reference = snapshot(init);
    let mut params = init.clone();
    let mut log = TrainLog::default();
    let mut step = 0;
    let limit = cfg.max_steps.unwrap_or(usize::MAX);
    'outer: for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..corpus.len()).collect();
        if cfg.shuffle {
            order.shuffle(&mut stream(cfg.seed, &[site::SHUFFLE, epoch as u64]));
        }
        for idx in order {
            if step >= limit {
                break 'outer;
            }
            let group = build_group(&params, &reference, &corpus[idx], cfg, step);
            let (loss, grad) = loss_and_grad(&group, &params, &reference, cfg.beta)?;
            params.add_scaled(&grad, -cfg.lr);
            if let Some(index) = params.first_non_finite() {
                return Err(TrainError::NonFinite { step, index });
            }
            let record = summarize(&group, step, epoch, loss);
            on_step(&record, &params);
            log.records.push(record);
            step += 1;
        }
    }
    Ok((params, log))
}

/// Mean rewards of groups drawn from `params` without updating.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardProbe {
    pub mean_total: f64,
    pub mean_acc: f64,
    pub mean_fmt: f64,
    pub mean_ano: f64,
    pub mean_len: f64,
    pub groups: usize,
}

/// Scores one group per example with the same rewards training uses, on
/// substreams keyed by `seed`.
pub fn probe_rewards(
    params: &PolicyParams,
    corpus: &[WeakExample],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<RewardProbe, TrainError> {
    check_inputs(params, corpus, cfg)?;
    let reference = snapshot(params);
    let probe_cfg = TrainConfig {
        seed: derive_seed(seed, &[site::PROBE]),
        ..cfg.clone()
    };
    let mut acc = RewardProbe::default();
    for (i, ex) in corpus.iter().enumerate() {
        let r = summarize(&build_group(params, &reference, ex, &probe_cfg, i), i, 0, 0.0);
        acc.mean_total += r.mean_total;
        acc.mean_acc += r.mean_acc;
        acc.mean_fmt += r.mean_fmt;
        acc.mean_ano += r.mean_ano;
        acc.mean_len += r.mean_len;
    }
    let n = corpus.len() as f64;
    acc.mean_total /= n;
    acc.mean_acc /= n;
    acc.mean_fmt /= n;
    acc.mean_ano /= n;
    acc.mean_len /= n;
    acc.groups = corpus.len();
    Ok(acc)
}
