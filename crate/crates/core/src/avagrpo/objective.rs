use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{k3, RewardBreakdown, TrainError, VerificationOutcome};
use crate::math::exp;
use crate::policy::{sample::accumulate_grad_logprob, logprob, Completion, Observation, PolicyParams, Reference};

#[derive(Debug, Clone)]
pub struct GroupMember {
    pub completion: Completion,
    pub verification: VerificationOutcome,
    pub rewards: RewardBreakdown,
    pub advantage: f64,
    /// k3 estimate at the sampling parameters.
    pub kl: f64,
}

/// The completions sampled for one video together with their scores.
#[derive(Debug, Clone)]
pub struct CompletionGroup {
    pub video_id: String,
    /// Frames the policy saw when sampling.
    pub observed: Vec<u32>,
    pub members: Vec<GroupMember>,
}

impl CompletionGroup {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check(group: &CompletionGroup, params: &PolicyParams, reference: &Reference) -> Result<Observation, TrainError> {
    let cfg = params.config();
    let rcfg = reference.params().config();
    if params.values().len() != reference.params().values().len() || cfg != rcfg {
        return Err(TrainError::DimensionMismatch {
            what: "reference parameters",
            expected: params.values().len(),
            found: reference.params().values().len(),
        });
    }
    if group.observed.len() != cfg.frames {
        return Err(TrainError::DimensionMismatch {
            what: "observed frames",
            expected: cfg.frames,
            found: group.observed.len(),
        });
    }
    if let Some(&t) = group.observed.iter().find(|&&t| t as usize >= cfg.vocab_size) {
        return Err(TrainError::DimensionMismatch {
            what: "token id",
            expected: cfg.vocab_size,
            found: t as usize,
        });
    }
    let n_cand = cfg.n_candidates();
    for m in &group.members {
        if let Some(k) = m.completion.trace.decisions.segment {
            if k >= n_cand {
                return Err(TrainError::DimensionMismatch {
                    what: "segment candidate",
                    expected: n_cand,
                    found: k,
                });
            }
        }
    }
    Ok(Observation::new(cfg, &group.observed))
}

/// Surrogate loss and its gradient at `params`.
///
/// The importance ratio is taken against the log-probability recorded when
/// each completion was sampled, so it equals 1 at the sampling parameters.
pub fn loss_and_grad(
    group: &CompletionGroup,
    params: &PolicyParams,
    reference: &Reference,
    beta: f64,
) -> Result<(f64, Vec<f64>), TrainError> {
    let obs = check(group, params, reference)?;
    let mut grad = vec![0.0; params.values().len()];
    if group.is_empty() {
        return Ok((0.0, grad));
    }
    let scale = -1.0 / group.len() as f64;
    let mut loss = 0.0;
    for m in &group.members {
        let d = &m.completion.trace.decisions;
        let lp = logprob(params, &obs, d);
        let lr = logprob(reference.params(), &obs, d);
        let ratio = exp(lp - m.completion.trace.total_logprob());
        loss += m.advantage * ratio - beta * k3(lp, lr);
        // d k3 / d lp = 1 - exp(lr - lp)
        let w = m.advantage * ratio - beta * (1.0 - exp(lr - lp));
        accumulate_grad_logprob(params, &obs, d, scale * w, &mut grad);
    }
    Ok((scale * loss, grad))
}

/// Loss only.
pub fn surrogate_loss(group: &CompletionGroup, params: &PolicyParams, reference: &Reference, beta: f64) -> Result<f64, TrainError> {
    loss_and_grad(group, params, reference, beta).map(|(l, _)| l)
}
