use alloc::format;
use alloc::string::String;

use crate::corpus::{Category, Label, SyntheticVideo, TemporalInterval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Aspect {
    Reasonability,
    Detail,
    Consistency,
}

impl Aspect {
    pub const ALL: [Aspect; 3] = [Aspect::Reasonability, Aspect::Detail, Aspect::Consistency];

    pub fn name(self) -> &'static str {
        match self {
            Aspect::Reasonability => "reasonability",
            Aspect::Detail => "detail",
            Aspect::Consistency => "consistency",
        }
    }

    fn rubric(self) -> &'static str {
        match self {
            Aspect::Reasonability => {
                "Rate whether the reasoning follows a valid cause-and-effect chain from what is observed \
                 to the final judgement."
            }
            Aspect::Detail => {
                "Rate how specific the description is: who is involved, what happens, when and where, \
                 and what follows from it."
            }
            Aspect::Consistency => {
                "Rate whether the reasoning and the final answer agree with each other and with the \
                 reference facts about the video."
            }
        }
    }
}

/// What the judge may know about the video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JudgeReference {
    pub label: Label,
    pub category: Option<Category>,
    pub interval: Option<TemporalInterval>,
}

impl From<&SyntheticVideo> for JudgeReference {
    fn from(v: &SyntheticVideo) -> Self {
        Self {
            label: v.label(),
            category: v.category(),
            interval: v.anomaly(),
        }
    }
}

/// `(system, user)` messages for one aspect.
pub fn judge_prompt(aspect: Aspect, answer: &str, reference: &JudgeReference) -> (String, String) {
    let system = format!(
        "You grade answers about surveillance videos. {} Reply with a single number between 0 and 1 \
         and nothing else.",
        aspect.rubric()
    );
    let mut facts = format!("label: {}", reference.label.as_str());
    if let Some(c) = reference.category {
        facts.push_str(&format!("\ncategory: {}", c.name()));
    }
    if let Some(iv) = reference.interval {
        facts.push_str(&format!("\nanomaly frames: {iv}"));
    }
    let user = format!("Reference facts:\n{facts}\n\nAnswer to grade:\n{answer}");
    (system, user)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgeReplyError {
    #[error("no score in judge reply {0:?}")]
    Unparseable(String),
    #[error("judge score {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// Reads the first number in `reply` and checks it lies in `[0, 1]`.
pub fn parse_judge_reply(reply: &str) -> Result<f64, JudgeReplyError> {
    let value = reply
        .split(|c: char| c.is_whitespace() || c == ',' || c == ':' || c == '"' || c == '=')
        .map(|t| t.trim_end_matches(['.', ';', ')']).trim_start_matches('('))
        .filter(|t| !t.is_empty())
        .find_map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .ok_or_else(|| JudgeReplyError::Unparseable(reply.into()))?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(JudgeReplyError::OutOfRange(value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JudgeScore {
    pub reasonability: f64,
    pub detail: f64,
    pub consistency: f64,
}

impl JudgeScore {
    pub fn new(reasonability: f64, detail: f64, consistency: f64) -> Result<Self, JudgeReplyError> {
        for v in [reasonability, detail, consistency] {
            if !(0.0..=1.0).contains(&v) {
                return Err(JudgeReplyError::OutOfRange(v));
            }
        }
        Ok(Self {
            reasonability,
            detail,
            consistency,
        })
    }

    pub fn get(&self, aspect: Aspect) -> f64 {
        match aspect {
            Aspect::Reasonability => self.reasonability,
            Aspect::Detail => self.detail,
            Aspect::Consistency => self.consistency,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replies() {
        assert_eq!(parse_judge_reply("0.7"), Ok(0.7));
        assert_eq!(parse_judge_reply(" Score: 0.25.\n"), Ok(0.25));
        assert_eq!(parse_judge_reply("1.4"), Err(JudgeReplyError::OutOfRange(1.4)));
        assert!(matches!(parse_judge_reply("great"), Err(JudgeReplyError::Unparseable(_))));
        assert!(matches!(parse_judge_reply("NaN"), Err(JudgeReplyError::Unparseable(_))));
    }

    #[test]
    fn prompt_carries_reference_facts() {
        let r = JudgeReference {
            label: Label::Abnormal,
            category: Some(Category::Fire),
            interval: Some(TemporalInterval::new(3, 9).unwrap()),
        };
        let (sys, user) = judge_prompt(Aspect::Detail, "text", &r);
        assert!(sys.contains("between 0 and 1"));
        assert!(user.contains("Abnormal") && user.contains("3-9") && user.ends_with("text"));
    }
}
