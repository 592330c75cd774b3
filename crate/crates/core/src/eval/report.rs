use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::{
    bleu_n, classification_metrics, grounding_metrics, meteor_lite, rouge_l, rouge_n, tokenize, MetricFlag,
    DEFAULT_THRESHOLDS,
};
use crate::corpus::SyntheticVideo;
use crate::cot::{extract_verdict, Verdict};
use crate::policy::{best_candidate, candidates, render, PolicyConfig, Verbosity};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("{predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("output ids do not match the corpus (missing: {missing:?}; extra: {extra:?}; duplicate: {duplicate:?})")]
    Ids {
        missing: Vec<String>,
        extra: Vec<String>,
        duplicate: Vec<String>,
    },
}

/// One model output.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct OutputRecord {
    pub video_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    /// Shape of the policy that produced the outputs; fixes the observed
    /// timeline and the reference segment grid.
    pub policy: PolicyConfig,
    pub thresholds: Vec<f64>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            policy: PolicyConfig::default(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub n_videos: usize,
    pub n_abnormal: usize,
    /// Outputs with no extractable verdict.
    pub unextractable: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub miou: f64,
    pub recall_at: Vec<(f64, f64)>,
    pub bleu2: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    pub rouge_l: f64,
    pub meteor_lite: f64,
    pub flags: Vec<MetricFlag>,
}

impl MetricsReport {
    /// Fixed-width two-column table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = Vec::new();
        let mut num = |k: &str, v: f64| rows.push((k.into(), format!("{v:.4}")));
        num("accuracy", self.accuracy);
        num("precision", self.precision);
        num("recall", self.recall);
        num("f1", self.f1);
        num("mIoU", self.miou);
        for (t, r) in &self.recall_at {
            num(&format!("R@{t}"), *r);
        }
        num("BLEU-2", self.bleu2);
        num("ROUGE-1", self.rouge1);
        num("ROUGE-2", self.rouge2);
        num("ROUGE-L", self.rouge_l);
        num("METEOR (lite)", self.meteor_lite);
        rows.push(("videos".into(), format!("{}", self.n_videos)));
        rows.push(("abnormal".into(), format!("{}", self.n_abnormal)));
        rows.push(("unextractable".into(), format!("{}", self.unextractable)));
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<16}{v:>10}");
        }
        for f in &self.flags {
            let _ = writeln!(out, "note: {f:?}");
        }
        out
    }
}

/// Ground-truth decisions rendered at medium verbosity, well-formed.
pub fn reference_text(config: &PolicyConfig, video: &SyntheticVideo) -> String {
    let verdict = match video.anomaly() {
        Some(truth) => {
            let k = best_candidate(config, video.duration(), &truth);
            Verdict::Abnormal {
                interval: candidates(config.frames, config.bins)[k],
                category: video.category(),
            }
        }
        None => Verdict::Normal,
    };
    render(&verdict, Verbosity::Medium, true).0
}

fn match_ids<'a>(outputs: &'a [OutputRecord], corpus: &[SyntheticVideo]) -> Result<Vec<&'a OutputRecord>, EvalError> {
    let mut by_id: BTreeMap<&str, &OutputRecord> = BTreeMap::new();
    let mut duplicate = Vec::new();
    for o in outputs {
        if by_id.insert(o.video_id.as_str(), o).is_some() && !duplicate.contains(&o.video_id) {
            duplicate.push(o.video_id.clone());
        }
    }
    let mut missing = Vec::new();
    let mut found = Vec::with_capacity(corpus.len());
    for v in corpus {
        match by_id.remove(v.id()) {
            Some(o) => found.push(o),
            None => missing.push(String::from(v.id())),
        }
    }
    let extra: Vec<String> = by_id.keys().map(|k| String::from(*k)).collect();
    if missing.is_empty() && extra.is_empty() && duplicate.is_empty() {
        Ok(found)
    } else {
        Err(EvalError::Ids {
            missing,
            extra,
            duplicate,
        })
    }
}

/// Scores one output per corpus video. The result does not depend on the
/// order of `outputs`.
pub fn evaluate(outputs: &[OutputRecord], corpus: &[SyntheticVideo], settings: &EvalSettings) -> Result<MetricsReport, EvalError> {
    if corpus.is_empty() {
        return Err(EvalError::Empty);
    }
    let matched = match_ids(outputs, corpus)?;
    let verdicts: Vec<Option<Verdict>> = matched.iter().map(|o| extract_verdict(&o.text)).collect();
    let predictions: Vec<_> = verdicts.iter().map(|v| v.as_ref().map(Verdict::prediction)).collect();
    let labels: Vec<_> = corpus.iter().map(SyntheticVideo::label).collect();
    let cls = classification_metrics(&predictions, &labels)?;
    let grd = grounding_metrics(&verdicts, corpus, settings.policy.frames, &settings.thresholds);

    let mut sums = [0.0f64; 5];
    let mut flags = cls.flags;
    flags.extend(grd.flags);
    for (o, v) in matched.iter().zip(corpus) {
        let reference = reference_text(&settings.policy, v);
        if tokenize(&o.text).is_empty() && tokenize(&reference).is_empty() && !flags.contains(&MetricFlag::EmptyTextPair) {
            flags.push(MetricFlag::EmptyTextPair);
        }
        sums[0] += bleu_n(&o.text, &reference, 2);
        sums[1] += rouge_n(&o.text, &reference, 1);
        sums[2] += rouge_n(&o.text, &reference, 2);
        sums[3] += rouge_l(&o.text, &reference);
        sums[4] += meteor_lite(&o.text, &reference);
    }
    let n = corpus.len() as f64;
    Ok(MetricsReport {
        n_videos: corpus.len(),
        n_abnormal: grd.n_abnormal,
        unextractable: verdicts.iter().filter(|v| v.is_none()).count(),
        accuracy: cls.accuracy,
        precision: cls.precision,
        recall: cls.recall,
        f1: cls.f1,
        miou: grd.miou,
        recall_at: grd.recall_at,
        bleu2: sums[0] / n,
        rouge1: sums[1] / n,
        rouge2: sums[2] / n,
        rouge_l: sums[3] / n,
        meteor_lite: sums[4] / n,
        flags,
    })
}
