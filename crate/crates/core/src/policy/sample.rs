use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::{render, Observation, PolicyParams};
use crate::corpus::{Category, Label, TemporalInterval};
use crate::cot::{CoTDocument, Verdict};
use crate::math::{dot, log_sigmoid, log_sum_exp, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verbosity {
    Short,
    Medium,
    Long,
}

impl Verbosity {
    pub const ALL: [Verbosity; 3] = [Verbosity::Short, Verbosity::Medium, Verbosity::Long];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The discrete choices that make up one completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decisions {
    pub class: Label,
    /// Candidate index; present iff `class` is abnormal.
    pub segment: Option<usize>,
    pub verbosity: Verbosity,
    pub wellformed: bool,
}

/// Log-probability of each decision under the policy that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentLogProbs {
    pub class: f64,
    pub segment: Option<f64>,
    pub verbosity: f64,
    pub wellformed: f64,
}

impl ComponentLogProbs {
    pub fn total(&self) -> f64 {
        self.class + self.segment.unwrap_or(0.0) + self.verbosity + self.wellformed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTrace {
    pub decisions: Decisions,
    pub logprobs: ComponentLogProbs,
}

impl DecisionTrace {
    pub fn total_logprob(&self) -> f64 {
        self.logprobs.total()
    }
}

/// One sampled completion: surface text, the trace that produced it, and the
/// parsed document when the text is well formed.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub trace: DecisionTrace,
    pub doc: Option<CoTDocument>,
}

fn segment_logits(params: &PolicyParams, obs: &Observation) -> Vec<f64> {
    let w = params.seg();
    (0..obs.candidates().len()).map(|k| dot(w, obs.seg_features(k))).collect()
}

fn check_shape(params: &PolicyParams, obs: &Observation) {
    assert_eq!(
        obs.cls_features().len(),
        params.cls().len(),
        "observation built for a different vocabulary"
    );
    assert_eq!(
        obs.candidates().len(),
        params.config().n_candidates(),
        "observation built for a different bin count"
    );
}

/// Exact per-component log-probabilities of `decisions`, re-scored under
/// `params`.
///
/// # Panics
/// If the decisions are inconsistent (segment presence must match the class,
/// segment index must be a valid candidate).
pub fn component_logprobs(params: &PolicyParams, obs: &Observation, decisions: &Decisions) -> ComponentLogProbs {
    check_shape(params, obs);
    let z = dot(params.cls(), obs.cls_features());
    let class = match decisions.class {
        Label::Abnormal => log_sigmoid(z),
        Label::Normal => log_sigmoid(-z),
    };
    let segment = match (decisions.class, decisions.segment) {
        (Label::Abnormal, Some(k)) => {
            let logits = segment_logits(params, obs);
            assert!(k < logits.len(), "segment index out of range");
            Some(logits[k] - log_sum_exp(&logits))
        }
        (Label::Normal, None) => None,
        _ => panic!("segment must be present exactly for abnormal decisions"),
    };
    let len = params.len_logits(decisions.class);
    let verbosity = len[decisions.verbosity.index()] - log_sum_exp(len);
    let f = params.fmt();
    let wellformed = if decisions.wellformed {
        log_sigmoid(f)
    } else {
        log_sigmoid(-f)
    };
    ComponentLogProbs {
        class,
        segment,
        verbosity,
        wellformed,
    }
}

/// Total log-probability of `decisions` under `params`.
pub fn logprob(params: &PolicyParams, obs: &Observation, decisions: &Decisions) -> f64 {
    component_logprobs(params, obs, decisions).total()
}

/// Adds `weight * ∇ log π(decisions)` into `out`.
pub(crate) fn accumulate_grad_logprob(
    params: &PolicyParams,
    obs: &Observation,
    decisions: &Decisions,
    weight: f64,
    out: &mut [f64],
) {
    check_shape(params, obs);
    let layout = params.layout();
    let phi = obs.cls_features();
    let p_abn = sigmoid(dot(params.cls(), phi));
    let y = if decisions.class.is_abnormal() { 1.0 } else { 0.0 };
    for (g, x) in out[layout.cls()].iter_mut().zip(phi) {
        *g += weight * (y - p_abn) * x;
    }

    if let Some(k) = decisions.segment {
        let logits = segment_logits(params, obs);
        let lse = log_sum_exp(&logits);
        let seg_out = &mut out[layout.seg()];
        for (j, l) in logits.iter().enumerate() {
            let p = crate::math::exp(l - lse);
            let coef = weight * (if j == k { 1.0 } else { 0.0 } - p);
            for (g, x) in seg_out.iter_mut().zip(obs.seg_features(j)) {
                *g += coef * x;
            }
        }
    }

    let len = params.len_logits(decisions.class);
    let lse = log_sum_exp(len);
    for (j, g) in out[layout.len(decisions.class)].iter_mut().enumerate() {
        let p = crate::math::exp(len[j] - lse);
        let hit = if j == decisions.verbosity.index() { 1.0 } else { 0.0 };
        *g += weight * (hit - p);
    }

    let w = if decisions.wellformed { 1.0 } else { 0.0 };
    out[layout.fmt()] += weight * (w - sigmoid(params.fmt()));
}

/// Analytic gradient of [`logprob`] with respect to every parameter.
pub fn grad_logprob(params: &PolicyParams, obs: &Observation, decisions: &Decisions) -> Vec<f64> {
    let mut out = vec![0.0; params.values().len()];
    accumulate_grad_logprob(params, obs, decisions, 1.0, &mut out);
    out
}

fn draw_categorical<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> usize {
    let lse = log_sum_exp(logits);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, l) in logits.iter().enumerate() {
        acc += crate::math::exp(l - lse);
        if u < acc {
            return k;
        }
    }
    logits.len() - 1
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = k;
        }
    }
    best
}

/// Renders decisions into a completion, reading the category from the
/// chosen span.
pub fn complete(params: &PolicyParams, obs: &Observation, decisions: Decisions) -> Completion {
    let logprobs = component_logprobs(params, obs, &decisions);
    let verdict = match decisions.segment {
        Some(k) => {
            let interval: TemporalInterval = obs.candidates()[k];
            let category: Category = obs.decode_category(&interval);
            Verdict::Abnormal {
                interval,
                category: Some(category),
            }
        }
        None => Verdict::Normal,
    };
    let (text, doc) = render(&verdict, decisions.verbosity, decisions.wellformed);
    Completion {
        text,
        trace: DecisionTrace { decisions, logprobs },
        doc,
    }
}

/// Draws the decisions of one completion without rendering text.
pub fn sample_decisions<R: Rng + ?Sized>(params: &PolicyParams, obs: &Observation, rng: &mut R) -> Decisions {
    check_shape(params, obs);
    let p_abn = sigmoid(dot(params.cls(), obs.cls_features()));
    let class = if rng.gen::<f64>() < p_abn {
        Label::Abnormal
    } else {
        Label::Normal
    };
    let segment = class
        .is_abnormal()
        .then(|| draw_categorical(&segment_logits(params, obs), rng));
    let verbosity = Verbosity::ALL[draw_categorical(params.len_logits(class), rng)];
    let wellformed = rng.gen::<f64>() < sigmoid(params.fmt());
    Decisions {
        class,
        segment,
        verbosity,
        wellformed,
    }
}

/// Draws one completion.
pub fn sample<R: Rng + ?Sized>(params: &PolicyParams, obs: &Observation, rng: &mut R) -> Completion {
    let decisions = sample_decisions(params, obs, rng);
    complete(params, obs, decisions)
}

/// Most likely choice for every decision; ties go to abnormal, the first
/// candidate, the first verbosity and well-formed.
pub fn decode_greedy(params: &PolicyParams, obs: &Observation) -> Completion {
    check_shape(params, obs);
    let class = if dot(params.cls(), obs.cls_features()) >= 0.0 {
        Label::Abnormal
    } else {
        Label::Normal
    };
    let segment = class.is_abnormal().then(|| argmax(&segment_logits(params, obs)));
    let verbosity = Verbosity::ALL[argmax(params.len_logits(class))];
    let wellformed = params.fmt() >= 0.0;
    complete(
        params,
        obs,
        Decisions {
            class,
            segment,
            verbosity,
            wellformed,
        },
    )
}

/// Every possible decision tuple for `obs`.
pub fn enumerate_decisions(obs: &Observation) -> Vec<Decisions> {
    let mut out = Vec::new();
    for class in [Label::Normal, Label::Abnormal] {
        let segments: Vec<Option<usize>> = match class {
            Label::Normal => vec![None],
            Label::Abnormal => (0..obs.candidates().len()).map(Some).collect(),
        };
        for segment in segments {
            for verbosity in Verbosity::ALL {
                for wellformed in [true, false] {
                    out.push(Decisions {
                        class,
                        segment,
                        verbosity,
                        wellformed,
                    });
                }
            }
        }
    }
    out
}
