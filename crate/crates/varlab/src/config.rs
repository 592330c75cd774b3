//! Run settings: a sectioned TOML file.
//!
//! ```toml
//! seed = 7
//!
//! [corpus]     # generator settings; `seed` here is replaced by the run seed
//! n_videos = 512
//!
//! [policy]
//! frames = 16
//! mode = "prefix"
//! prefix_len = 4
//!
//! [sft]
//! [train]      # group_size, beta, lr, ...
//! [eval]
//! [judge]
//! [paths]
//! ```
//!
//! Every section is optional and every key has a default except the seed,
//! which must come from the file or `--seed`. [`RunConfig::to_toml`] writes
//! the fully resolved form so a run directory shows every value used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use varlab_core::avagrpo::TrainConfig;
use varlab_core::corpus::{CorpusError, CorpusSpec};
use varlab_core::eval::{EvalSettings, DEFAULT_THRESHOLDS};
use varlab_core::policy::{ObservationMode, PolicyConfig, SftConfig};

use crate::error::read_text;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Full,
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicySection {
    /// Frames the policy observes after uniform resampling.
    pub frames: usize,
    pub mode: Mode,
    /// Frames visible to the class decision in prefix mode.
    pub prefix_len: usize,
}

impl Default for PolicySection {
    fn default() -> Self {
        Self {
            frames: 16,
            mode: Mode::Full,
            prefix_len: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SftSection {
    pub steps: usize,
    pub lr: f64,
    pub supervise_segment: bool,
    /// Fraction of the corpus held back to report accuracy after fitting.
    pub holdout: f64,
}

impl Default for SftSection {
    fn default() -> Self {
        let d = SftConfig::default();
        Self {
            steps: d.steps,
            lr: d.lr,
            supervise_segment: d.supervise_segment,
            holdout: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub thresholds: Vec<f64>,
    /// Sample completions instead of greedy decoding.
    pub stochastic: bool,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self {
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            stochastic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeConfig {
    /// Prefix of the chat-completion endpoint, e.g. `https://host/v1`.
    pub base_url: String,
    pub model: String,
    /// Extra attempts after the first failed request.
    pub retries: u32,
    /// Delay before the first retry; doubles on each further retry.
    pub backoff_ms: u64,
    pub timeout_s: u64,
    pub concurrency: usize,
}

impl Default for JudgeConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model: "judge".into(),
            retries: 3,
            backoff_ms: 500,
            timeout_s: 60,
            concurrency: 4,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub corpus: CorpusSpec,
    pub policy: PolicySection,
    pub sft: SftSection,
    pub train: TrainConfig,
    /// Write an intermediate checkpoint every this many updates; 0 disables.
    pub ckpt_every: usize,
    pub eval: EvalSection,
    pub judge: JudgeConfig,
    pub paths: PathsSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .message()
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "config".into());
            Error::config(field, e.message().trim().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_text(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies the seed override, copies it into every seeded section and
    /// checks all values.
    pub fn resolve(mut self, seed: Option<u64>) -> Result<Self> {
        let seed = seed
            .or(self.seed)
            .ok_or_else(|| Error::config("seed", "is required (set it in the config or pass --seed)"))?;
        self.seed = Some(seed);
        self.corpus.seed = seed;
        self.train.seed = seed;
        self.validate()?;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.corpus.validate().map_err(|e| spec_error("corpus", e))?;
        self.policy_config().validate().map_err(|e| spec_error("policy", e))?;
        if self.policy.frames < self.corpus.bins {
            return Err(Error::config("policy.frames", "must be at least corpus.bins"));
        }
        if !(self.sft.lr >= 0.0 && self.sft.lr.is_finite()) {
            return Err(Error::config("sft.lr", "must be finite and nonnegative"));
        }
        if !(0.0..1.0).contains(&self.sft.holdout) {
            return Err(Error::config("sft.holdout", "must lie in [0, 1)"));
        }
        self.train
            .validate()
            .map_err(|(field, reason)| Error::config(format!("train.{field}"), reason))?;
        if self.eval.thresholds.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::config("eval.thresholds", "must lie in [0, 1]"));
        }
        if self.judge.concurrency == 0 {
            return Err(Error::config("judge.concurrency", "must be positive"));
        }
        if self.judge.base_url.trim().is_empty() {
            return Err(Error::config("judge.base_url", "must not be empty"));
        }
        Ok(())
    }

    /// Vocabulary and bins come from the corpus section.
    pub fn policy_config(&self) -> PolicyConfig {
        PolicyConfig {
            vocab_size: self.corpus.vocab_size,
            bins: self.corpus.bins,
            frames: self.policy.frames,
            mode: match self.policy.mode {
                Mode::Full => ObservationMode::Full,
                Mode::Prefix => ObservationMode::Prefix(self.policy.prefix_len),
            },
        }
    }

    pub fn sft_config(&self) -> SftConfig {
        SftConfig {
            steps: self.sft.steps,
            lr: self.sft.lr,
            supervise_segment: self.sft.supervise_segment,
        }
    }

    pub fn eval_settings(&self, policy: PolicyConfig) -> EvalSettings {
        EvalSettings {
            policy,
            thresholds: self.eval.thresholds.clone(),
        }
    }
}

fn spec_error(section: &str, e: CorpusError) -> Error {
    match e {
        CorpusError::InvalidSpec { field, reason } => Error::config(format!("{section}.{field}"), reason),
        other => Error::config(section, other.to_string()),
    }
}
