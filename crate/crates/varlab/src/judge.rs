//! Client for an external grading model behind a chat-completion endpoint.
//!
//! Each (answer, aspect) pair is one request. Requests run on a bounded pool
//! of scoped threads; results come back in input order regardless of which
//! request finishes first. Transport failures, 429 and 5xx replies are
//! retried with exponential backoff. A video whose three aspects did not all
//! succeed is reported with its errors and marks the run incomplete.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use varlab_core::eval::{judge_prompt, parse_judge_reply, Aspect, JudgeReference, JudgeReplyError, JudgeScore};

pub use crate::config::JudgeConfig;

pub const API_KEY_VAR: &str = "JUDGE_API_KEY";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgeError {
    #[error("{API_KEY_VAR} is not set")]
    MissingKey,
    #[error("judge endpoint unreachable after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("judge endpoint returned HTTP {status} after {attempts} attempts")]
    Status { status: u16, attempts: u32 },
    #[error(transparent)]
    Reply(#[from] JudgeReplyError),
    #[error("malformed judge response: {0}")]
    Malformed(String),
}

impl JudgeError {
    fn retryable(&self) -> bool {
        match self {
            JudgeError::Transport { .. } => true,
            JudgeError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

pub struct JudgeClient {
    config: JudgeConfig,
    key: String,
    agent: ureq::Agent,
}

impl JudgeClient {
    /// Reads the credential from the environment.
    pub fn from_env(config: JudgeConfig) -> Result<Self, JudgeError> {
        let key = std::env::var(API_KEY_VAR).map_err(|_| JudgeError::MissingKey)?;
        Ok(Self::new(config, key))
    }

    pub fn new(config: JudgeConfig, key: impl Into<String>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(config.timeout_s.max(1)))
            .build();
        Self {
            config,
            key: key.into(),
            agent,
        }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn request_once(&self, system: &str, user: &str) -> Result<String, JudgeError> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let resp = self
            .agent
            .post(&self.url())
            .set("Authorization", &format!("Bearer {}", self.key))
            .send_json(body);
        let resp = match resp {
            Ok(r) => r,
            Err(ureq::Error::Status(status, _)) => return Err(JudgeError::Status { status, attempts: 1 }),
            Err(e) => {
                return Err(JudgeError::Transport {
                    attempts: 1,
                    message: e.to_string(),
                })
            }
        };
        let value: serde_json::Value = resp
            .into_json()
            .map_err(|e| JudgeError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| JudgeError::Malformed("no choices[0].message.content".into()))
    }

    /// One aspect score, with retries.
    pub fn score_aspect(&self, aspect: Aspect, answer: &str, reference: &JudgeReference) -> Result<f64, JudgeError> {
        let (system, user) = judge_prompt(aspect, answer, reference);
        let mut delay = self.config.backoff_ms;
        let mut attempt = 1;
        loop {
            match self.request_once(&system, &user) {
                Ok(reply) => return Ok(parse_judge_reply(&reply)?),
                Err(e) if e.retryable() && attempt <= self.config.retries => {
                    thread::sleep(Duration::from_millis(delay));
                    delay = delay.saturating_mul(2);
                    attempt += 1;
                }
                Err(JudgeError::Transport { message, .. }) => {
                    return Err(JudgeError::Transport {
                        attempts: attempt,
                        message,
                    })
                }
                Err(JudgeError::Status { status, .. }) => {
                    return Err(JudgeError::Status {
                        status,
                        attempts: attempt,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn score(&self, answer: &str, reference: &JudgeReference) -> Result<JudgeScore, JudgeError> {
        let r = self.score_aspect(Aspect::Reasonability, answer, reference)?;
        let d = self.score_aspect(Aspect::Detail, answer, reference)?;
        let c = self.score_aspect(Aspect::Consistency, answer, reference)?;
        Ok(JudgeScore::new(r, d, c)?)
    }

    /// Scores every item with at most `concurrency` requests in flight.
    pub fn run(&self, items: &[JudgeItem]) -> JudgeRun {
        let jobs: Vec<(usize, Aspect)> = (0..items.len())
            .flat_map(|i| Aspect::ALL.into_iter().map(move |a| (i, a)))
            .collect();
        let results: Vec<Mutex<Option<Result<f64, JudgeError>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.concurrency.clamp(1, jobs.len().max(1));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(i, aspect)) = jobs.get(k) else { break };
                    let item = &items[i];
                    let r = self.score_aspect(aspect, &item.answer, &item.reference);
                    *results[k].lock().expect("no panics while holding the lock") = Some(r);
                });
            }
        });
        let mut results = results
            .into_iter()
            .map(|m| m.into_inner().expect("lock not poisoned").expect("every job ran"));
        let mut videos = Vec::with_capacity(items.len());
        for item in items {
            let mut scores = [0.0; 3];
            let mut errors = Vec::new();
            for (slot, aspect) in scores.iter_mut().zip(Aspect::ALL) {
                match results.next().expect("three results per item") {
                    Ok(v) => *slot = v,
                    Err(e) => errors.push(format!("{}: {e}", aspect.name())),
                }
            }
            let score = if errors.is_empty() {
                JudgeScore::new(scores[0], scores[1], scores[2]).ok()
            } else {
                None
            };
            videos.push(JudgedVideo {
                video_id: item.video_id.clone(),
                score,
                errors,
            });
        }
        JudgeRun::new(videos)
    }
}

pub struct JudgeItem {
    pub video_id: String,
    pub answer: String,
    pub reference: JudgeReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgedVideo {
    pub video_id: String,
    pub score: Option<JudgeScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeRun {
    /// False when any video is missing a score.
    pub complete: bool,
    pub scored: usize,
    /// Means over scored videos only.
    pub mean: Option<JudgeScore>,
    pub videos: Vec<JudgedVideo>,
}

impl JudgeRun {
    fn new(videos: Vec<JudgedVideo>) -> Self {
        let scored: Vec<&JudgeScore> = videos.iter().filter_map(|v| v.score.as_ref()).collect();
        let n = scored.len();
        let mean = (n > 0).then(|| {
            let m = |f: fn(&JudgeScore) -> f64| scored.iter().map(|s| f(s)).sum::<f64>() / n as f64;
            JudgeScore {
                reasonability: m(|s| s.reasonability),
                detail: m(|s| s.detail),
                consistency: m(|s| s.consistency),
            }
        });
        Self {
            complete: n == videos.len(),
            scored: n,
            mean,
            videos,
        }
    }
}
