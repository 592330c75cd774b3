use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{
    AnswerSection, CoTDocument, Diagnostic, DiagnosticKind, FormatDiagnostics, ThinkSection, Which, ANSWER_FIELDS,
    FULL_STEPS, SIMPLIFIED_STEPS,
};
use crate::corpus::TemporalInterval;

const MAX_TAG_NAME: usize = 32;
const ROOT_FIELDS: [&str; 2] = ["think", "answer"];
const THINK_STEPS: [&str; 6] = [
    FULL_STEPS[0],
    FULL_STEPS[1],
    FULL_STEPS[2],
    FULL_STEPS[3],
    SIMPLIFIED_STEPS[0],
    SIMPLIFIED_STEPS[1],
];

fn is_known(name: &str) -> bool {
    ROOT_FIELDS.contains(&name) || THINK_STEPS.contains(&name) || ANSWER_FIELDS.contains(&name)
}

/// Outcome of the lenient parse: a document when no blocking diagnostic was
/// found, plus every diagnostic (blocking and strict-only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseReport {
    pub doc: Option<CoTDocument>,
    pub diagnostics: FormatDiagnostics,
}

/// Outcome of the strict format check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormatCheck {
    pub valid: bool,
    pub diagnostics: FormatDiagnostics,
}

/// Lenient parse. Never panics; failure is returned as diagnostics.
pub fn parse(text: &str) -> Result<CoTDocument, FormatDiagnostics> {
    let report = parse_report(text);
    report.doc.ok_or(report.diagnostics)
}

/// True iff the text parses, has every required tag, keeps canonical order and
/// has nothing outside `<think>` and `<answer>`.
pub fn validate_format(text: &str) -> FormatCheck {
    let report = parse_report(text);
    FormatCheck {
        valid: report.doc.is_some() && report.diagnostics.is_empty(),
        diagnostics: report.diagnostics,
    }
}

pub fn parse_report(text: &str) -> ParseReport {
    let mut ctx = Ctx::build(text);
    let doc = ctx.interpret();
    let blocking = ctx.diags.iter().any(|d| !d.strict);
    ctx.diags.sort_by_key(|d| (d.span.start, d.span.end));
    ParseReport {
        doc: if blocking { None } else { doc },
        diagnostics: FormatDiagnostics(ctx.diags),
    }
}

enum Token<'a> {
    Open(&'a str, Range<usize>),
    Close(&'a str, Range<usize>),
    Text(Range<usize>),
}

/// Splits `src` into tags of the form `<name>` / `</name>` with
/// `name` in `[a-z_]{1,32}`; everything else is text.
fn tokenize(src: &str) -> Vec<Token<'_>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut text_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'<' {
            i += 1;
            continue;
        }
        let closing = bytes.get(i + 1) == Some(&b'/');
        let name_start = i + 1 + closing as usize;
        let mut j = name_start;
        while j < bytes.len() && j - name_start <= MAX_TAG_NAME && (bytes[j].is_ascii_lowercase() || bytes[j] == b'_') {
            j += 1;
        }
        let len = j - name_start;
        if len == 0 || len > MAX_TAG_NAME || bytes.get(j) != Some(&b'>') {
            i += 1;
            continue;
        }
        if text_start < i {
            out.push(Token::Text(text_start..i));
        }
        let name = &src[name_start..j];
        let span = i..j + 1;
        out.push(if closing {
            Token::Close(name, span)
        } else {
            Token::Open(name, span)
        });
        i = j + 1;
        text_start = i;
    }
    if text_start < bytes.len() {
        out.push(Token::Text(text_start..bytes.len()));
    }
    out
}

struct Element<'a> {
    name: &'a str,
    open: Range<usize>,
    close: Option<Range<usize>>,
    children: Vec<usize>,
    stray: Vec<Range<usize>>,
}

struct Ctx<'a> {
    src: &'a str,
    els: Vec<Element<'a>>,
    diags: Vec<Diagnostic>,
}

impl<'a> Ctx<'a> {
    fn build(src: &'a str) -> Self {
        let mut els = vec![Element {
            name: "",
            open: 0..0,
            close: Some(src.len()..src.len()),
            children: Vec::new(),
            stray: Vec::new(),
        }];
        let mut diags = Vec::new();
        let mut stack = vec![0usize];
        // Open elements per name, so a closing tag only searches the stack
        // when a match exists.
        let mut open_count: BTreeMap<&str, usize> = BTreeMap::new();

        for tok in tokenize(src) {
            match tok {
                Token::Text(span) => {
                    if !src[span.clone()].trim().is_empty() {
                        let top = *stack.last().unwrap();
                        els[top].stray.push(span);
                    }
                }
                Token::Open(name, span) => {
                    let idx = els.len();
                    let parent = *stack.last().unwrap();
                    els.push(Element {
                        name,
                        open: span,
                        close: None,
                        children: Vec::new(),
                        stray: Vec::new(),
                    });
                    els[parent].children.push(idx);
                    stack.push(idx);
                    *open_count.entry(name).or_default() += 1;
                }
                Token::Close(name, span) => {
                    if open_count.get(name).copied().unwrap_or(0) == 0 {
                        diags.push(Diagnostic::error(DiagnosticKind::UnexpectedClosingTag(name.into()), span));
                        continue;
                    }
                    while let Some(top) = stack.pop() {
                        *open_count.get_mut(els[top].name).unwrap() -= 1;
                        if els[top].name == name {
                            els[top].close = Some(span);
                            break;
                        }
                        diags.push(Diagnostic::error(
                            DiagnosticKind::UnclosedTag(els[top].name.into()),
                            els[top].open.clone(),
                        ));
                    }
                }
            }
        }
        for &idx in stack.iter().skip(1) {
            diags.push(Diagnostic::error(
                DiagnosticKind::UnclosedTag(els[idx].name.into()),
                els[idx].open.clone(),
            ));
        }
        Self { src, els, diags }
    }

    fn span_of(&self, idx: usize) -> Range<usize> {
        let el = &self.els[idx];
        match &el.close {
            Some(c) => el.open.start..c.end,
            None => el.open.clone(),
        }
    }

    /// Sorts the children of `idx` into the slots of `allowed`, flagging
    /// duplicates, foreign tags, stray text and out-of-order tags.
    fn slots(&mut self, idx: usize, allowed: &[&'static str]) -> Vec<Option<usize>> {
        let mut slots = vec![None; allowed.len()];
        let mut seen: Vec<usize> = Vec::new();
        let parent = if idx == 0 { "document" } else { self.els[idx].name };
        for &child in &self.els[idx].children {
            let name = self.els[child].name;
            let span = self.els[child].open.clone();
            match allowed.iter().position(|a| *a == name) {
                Some(k) if slots[k].is_some() => {
                    self.diags.push(Diagnostic::error(DiagnosticKind::DuplicateTag(name.into()), span));
                }
                Some(k) => {
                    slots[k] = Some(child);
                    if let Some(&prev) = seen.last() {
                        if prev > k {
                            self.diags.push(Diagnostic::strict(
                                DiagnosticKind::NonCanonicalOrder {
                                    before: allowed[prev].into(),
                                    after: allowed[k].into(),
                                },
                                span,
                            ));
                        }
                    }
                    seen.push(k);
                }
                None if is_known(name) => self.diags.push(Diagnostic::error(
                    DiagnosticKind::MisplacedTag {
                        tag: name.into(),
                        parent: parent.into(),
                    },
                    span,
                )),
                None => self.diags.push(Diagnostic::error(DiagnosticKind::UnknownTag(name.into()), span)),
            }
        }
        for span in self.els[idx].stray.clone() {
            self.diags.push(Diagnostic::strict(DiagnosticKind::StrayText, span));
        }
        slots
    }

    /// Text content of a leaf element, unescaped and trimmed.
    fn leaf_text(&mut self, idx: usize) -> Option<String> {
        let el = &self.els[idx];
        let mut ok = true;
        for &child in &el.children {
            self.diags.push(Diagnostic::error(
                DiagnosticKind::MisplacedTag {
                    tag: self.els[child].name.into(),
                    parent: el.name.into(),
                },
                self.els[child].open.clone(),
            ));
            ok = false;
        }
        let close = el.close.clone()?;
        if !ok {
            return None;
        }
        let text = unescape(&self.src[el.open.end..close.start]);
        let trimmed = text.trim();
        if trimmed.is_empty() {
            self.diags.push(Diagnostic::error(
                DiagnosticKind::EmptySection(el.name.into()),
                self.span_of(idx),
            ));
            return None;
        }
        Some(trimmed.into())
    }

    fn missing(&mut self, name: &str, at: Range<usize>) {
        self.diags.push(Diagnostic::error(DiagnosticKind::MissingTag(name.into()), at));
    }

    fn interpret(&mut self) -> Option<CoTDocument> {
        let root = self.slots(0, &ROOT_FIELDS);
        let end = self.src.len();
        let think = match root[0] {
            Some(idx) => self.think(idx),
            None => {
                self.missing("think", end..end);
                None
            }
        };
        let answer = match root[1] {
            Some(idx) => self.answer(idx),
            None => {
                self.missing("answer", end..end);
                None
            }
        };
        let (think, answer) = (think?, answer?);
        if think.1 != answer.0.which.is_normal() {
            self.diags
                .push(Diagnostic::error(DiagnosticKind::InconsistentVariant, think.2));
            return None;
        }
        match CoTDocument::new(think.0, answer.0) {
            Ok(doc) => Some(doc),
            Err(FormatDiagnostics(found)) => {
                let span = answer.1;
                self.diags.extend(found.into_iter().map(|mut d| {
                    d.span = span.clone();
                    d
                }));
                None
            }
        }
    }

    /// Returns the section, whether it is the simplified variant, and its span.
    fn think(&mut self, idx: usize) -> Option<(ThinkSection, bool, Range<usize>)> {
        let span = self.span_of(idx);
        let slots = self.slots(idx, &THINK_STEPS);
        let full_present = slots[..4].iter().filter(|s| s.is_some()).count();
        let simple_present = slots[4..].iter().filter(|s| s.is_some()).count();
        if full_present > 0 && simple_present > 0 {
            self.diags
                .push(Diagnostic::error(DiagnosticKind::InconsistentVariant, span));
            return None;
        }
        if full_present == 0 && simple_present == 0 {
            self.diags
                .push(Diagnostic::error(DiagnosticKind::EmptySection("think".into()), span));
            return None;
        }
        let range = if full_present > 0 { 0..4 } else { 4..6 };
        let mut texts = Vec::new();
        for k in range {
            match slots[k] {
                Some(step) => texts.push(self.leaf_text(step)),
                None => {
                    self.missing(THINK_STEPS[k], span.clone());
                    texts.push(None);
                }
            }
        }
        let texts: Option<Vec<String>> = texts.into_iter().collect();
        let mut texts = texts?.into_iter();
        let mut next = || texts.next().unwrap();
        if full_present > 0 {
            Some((
                ThinkSection::Full {
                    global_perception: next(),
                    local_perception: next(),
                    shallow_cognition: next(),
                    deep_cognition: next(),
                },
                false,
                span,
            ))
        } else {
            Some((
                ThinkSection::Simplified {
                    perception: next(),
                    cognition: next(),
                },
                true,
                span,
            ))
        }
    }

    fn answer(&mut self, idx: usize) -> Option<(AnswerSection, Range<usize>)> {
        let span = self.span_of(idx);
        let slots = self.slots(idx, &ANSWER_FIELDS);
        let mut texts: Vec<Option<String>> = Vec::with_capacity(6);
        for slot in &slots {
            texts.push(match slot {
                Some(el) => self.leaf_text(*el),
                None => None,
            });
        }
        let mut ok = true;
        for (k, name) in ["which", "what"].iter().enumerate() {
            if slots[k].is_none() {
                self.missing(name, span.clone());
                ok = false;
            } else if texts[k].is_none() {
                ok = false;
            }
        }
        let which = texts[0].as_deref().map(Which::from_text);
        let when = match (slots[2], &texts[2]) {
            (Some(el), Some(payload)) => match parse_when(payload) {
                Some(iv) => Some(iv),
                None => {
                    self.diags.push(Diagnostic::error(
                        DiagnosticKind::InvalidWhen(payload.clone()),
                        self.span_of(el),
                    ));
                    ok = false;
                    None
                }
            },
            (Some(_), None) => {
                ok = false;
                None
            }
            _ => None,
        };
        if let Some(which) = &which {
            match (which.is_normal(), slots[2]) {
                (true, Some(el)) => {
                    self.diags
                        .push(Diagnostic::error(DiagnosticKind::WhenForbiddenForNormal, self.span_of(el)));
                    ok = false;
                }
                (false, None) => {
                    self.missing("when", span.clone());
                    ok = false;
                }
                _ => {}
            }
        }
        for k in 3..6 {
            if slots[k].is_some() && texts[k].is_none() {
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        let mut texts = texts.into_iter();
        let _which_text = texts.next();
        let what = texts.next().flatten()?;
        let _when_text = texts.next();
        Some((
            AnswerSection {
                which: which?,
                what,
                when,
                where_: texts.next().flatten(),
                why: texts.next().flatten(),
                how: texts.next().flatten(),
            },
            span,
        ))
    }
}

/// `start-end` in frame indices, whitespace tolerant.
fn parse_when(payload: &str) -> Option<TemporalInterval> {
    let (a, b) = payload.split_once('-')?;
    let start = a.trim().parse().ok()?;
    let end = b.trim().parse().ok()?;
    TemporalInterval::new(start, end).ok()
}

pub(crate) fn unescape(raw: &str) -> String {
    if !raw.contains('&') {
        return raw.into();
    }
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        let (ch, skip) = if rest.starts_with("&lt;") {
            ('<', 4)
        } else if rest.starts_with("&gt;") {
            ('>', 4)
        } else if rest.starts_with("&amp;") {
            ('&', 5)
        } else {
            ('&', 1)
        };
        out.push(ch);
        rest = &rest[skip..];
    }
    out.push_str(rest);
    out
}
