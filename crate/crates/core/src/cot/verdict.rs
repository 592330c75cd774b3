use crate::corpus::{Category, Label, TemporalInterval};

use super::{parse, AnswerSection, Which};

/// Machine-readable decision read from `<which>` and `<when>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Normal,
    Abnormal {
        interval: TemporalInterval,
        /// `None` when `<which>` names a category outside the taxonomy.
        category: Option<Category>,
    },
}

impl Verdict {
    pub(crate) fn from_answer(answer: &AnswerSection) -> Self {
        match (&answer.which, answer.when) {
            (Which::Normal, _) => Verdict::Normal,
            (which, Some(interval)) => Verdict::Abnormal {
                interval,
                category: match which {
                    Which::Known(c) => Some(*c),
                    _ => None,
                },
            },
            // CoTDocument guarantees `when` for abnormal answers.
            (_, None) => unreachable!("abnormal answer without interval"),
        }
    }

    pub fn prediction(&self) -> Label {
        match self {
            Verdict::Normal => Label::Normal,
            Verdict::Abnormal { .. } => Label::Abnormal,
        }
    }

    pub fn interval(&self) -> Option<TemporalInterval> {
        match self {
            Verdict::Normal => None,
            Verdict::Abnormal { interval, .. } => Some(*interval),
        }
    }

    pub fn category(&self) -> Option<Category> {
        match self {
            Verdict::Normal => None,
            Verdict::Abnormal { category, .. } => *category,
        }
    }
}

/// `None` means "unextractable": the text does not parse.
pub fn extract_verdict(text: &str) -> Option<Verdict> {
    parse(text).ok().map(|doc| doc.verdict())
}
