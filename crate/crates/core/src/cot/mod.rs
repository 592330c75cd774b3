//! Perception-to-cognition reasoning documents.
//!
//! A completion is a `<think>` block followed by an `<answer>` block. Abnormal
//! verdicts carry a four-step think section (global perception, local
//! perception, shallow cognition, deep cognition); normal verdicts carry the
//! two-step form (perception, cognition). The answer holds `which` and `what`,
//! `when` exactly for abnormal verdicts, and optional `where`, `why`, `how`.
//!
//! [`parse`] is lenient about tag order and surrounding text so third-party
//! outputs can still be scored. [`validate_format`] is strict: it additionally
//! requires canonical order and nothing outside the two blocks.

mod diagnostics;
mod parse;
mod serialize;
mod verdict;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{Category, TemporalInterval};

pub use diagnostics::{Diagnostic, DiagnosticKind, FormatDiagnostics};
pub use parse::{parse, parse_report, validate_format, FormatCheck, ParseReport};
pub use serialize::serialize;
pub use verdict::{extract_verdict, Verdict};

pub(crate) const FULL_STEPS: [&str; 4] = [
    "global_perception",
    "local_perception",
    "shallow_cognition",
    "deep_cognition",
];
pub(crate) const SIMPLIFIED_STEPS: [&str; 2] = ["perception", "cognition"];
pub(crate) const ANSWER_FIELDS: [&str; 6] = ["which", "what", "when", "where", "why", "how"];

/// Label written in `<which>` for normal videos.
pub const NORMAL: &str = "Normal";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThinkVariant {
    Full,
    Simplified,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ThinkSection {
    Full {
        global_perception: String,
        local_perception: String,
        shallow_cognition: String,
        deep_cognition: String,
    },
    Simplified {
        perception: String,
        cognition: String,
    },
}

impl ThinkSection {
    pub fn variant(&self) -> ThinkVariant {
        match self {
            ThinkSection::Full { .. } => ThinkVariant::Full,
            ThinkSection::Simplified { .. } => ThinkVariant::Simplified,
        }
    }

    /// Step texts in canonical order, paired with their tag names.
    pub fn steps(&self) -> Vec<(&'static str, &str)> {
        match self {
            ThinkSection::Full {
                global_perception,
                local_perception,
                shallow_cognition,
                deep_cognition,
            } => vec![
                (FULL_STEPS[0], global_perception.as_str()),
                (FULL_STEPS[1], local_perception.as_str()),
                (FULL_STEPS[2], shallow_cognition.as_str()),
                (FULL_STEPS[3], deep_cognition.as_str()),
            ],
            ThinkSection::Simplified { perception, cognition } => vec![
                (SIMPLIFIED_STEPS[0], perception.as_str()),
                (SIMPLIFIED_STEPS[1], cognition.as_str()),
            ],
        }
    }

    fn steps_mut(&mut self) -> Vec<&mut String> {
        match self {
            ThinkSection::Full {
                global_perception,
                local_perception,
                shallow_cognition,
                deep_cognition,
            } => vec![global_perception, local_perception, shallow_cognition, deep_cognition],
            ThinkSection::Simplified { perception, cognition } => vec![perception, cognition],
        }
    }
}

/// Content of `<which>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Which {
    Normal,
    Known(Category),
    /// A category name outside the taxonomy. Still an abnormal verdict.
    Unknown(String),
}

impl Which {
    pub fn from_text(text: &str) -> Self {
        let t = text.trim();
        if t == NORMAL {
            Which::Normal
        } else if let Some(c) = Category::from_name(t) {
            Which::Known(c)
        } else {
            Which::Unknown(t.into())
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Which::Normal => NORMAL,
            Which::Known(c) => c.name(),
            Which::Unknown(s) => s,
        }
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, Which::Normal)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Which::Unknown(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerSection {
    pub which: Which,
    pub what: String,
    pub when: Option<TemporalInterval>,
    pub where_: Option<String>,
    pub why: Option<String>,
    pub how: Option<String>,
}

/// A structurally valid reasoning document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoTDocument {
    think: ThinkSection,
    answer: AnswerSection,
}

impl CoTDocument {
    /// Trims every text and checks the document invariants.
    pub fn new(mut think: ThinkSection, mut answer: AnswerSection) -> Result<Self, FormatDiagnostics> {
        let mut diags = Vec::new();
        let mut flag = |kind| diags.push(Diagnostic::error(kind, 0..0));
        for (name, text) in think_names(&think).into_iter().zip(think.steps_mut()) {
            trim_in_place(text);
            if text.is_empty() {
                flag(DiagnosticKind::EmptySection(name.into()));
            }
        }
        trim_in_place(&mut answer.what);
        if answer.what.is_empty() {
            flag(DiagnosticKind::EmptySection("what".into()));
        }
        if let Which::Unknown(s) = &mut answer.which {
            trim_in_place(s);
            if s.is_empty() {
                flag(DiagnosticKind::EmptySection("which".into()));
            }
        }
        for (name, opt) in [("where", &mut answer.where_), ("why", &mut answer.why), ("how", &mut answer.how)] {
            if let Some(text) = opt {
                trim_in_place(text);
                if text.is_empty() {
                    flag(DiagnosticKind::EmptySection(name.into()));
                }
            }
        }
        let normal = answer.which.is_normal();
        if normal && answer.when.is_some() {
            flag(DiagnosticKind::WhenForbiddenForNormal);
        }
        if !normal && answer.when.is_none() {
            flag(DiagnosticKind::MissingTag("when".into()));
        }
        let expected = if normal {
            ThinkVariant::Simplified
        } else {
            ThinkVariant::Full
        };
        if think.variant() != expected {
            flag(DiagnosticKind::InconsistentVariant);
        }
        if diags.is_empty() {
            Ok(Self { think, answer })
        } else {
            Err(FormatDiagnostics(diags))
        }
    }

    pub fn think(&self) -> &ThinkSection {
        &self.think
    }

    pub fn answer(&self) -> &AnswerSection {
        &self.answer
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::from_answer(&self.answer)
    }
}

fn think_names(think: &ThinkSection) -> Vec<&'static str> {
    think.steps().into_iter().map(|(n, _)| n).collect()
}

fn trim_in_place(s: &mut String) {
    let t = s.trim();
    if t.len() != s.len() {
        *s = t.into();
    }
}

/// Whitespace-delimited words across all think steps.
pub fn think_word_count(doc: &CoTDocument) -> usize {
    doc.think
        .steps()
        .iter()
        .map(|(_, t)| t.split_whitespace().count())
        .sum()
}
