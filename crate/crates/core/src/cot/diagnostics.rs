use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnclosedTag(String),
    UnexpectedClosingTag(String),
    /// An element appears where its parent does not allow it.
    MisplacedTag { tag: String, parent: String },
    UnknownTag(String),
    DuplicateTag(String),
    MissingTag(String),
    EmptySection(String),
    /// Think steps do not form exactly one of the two variants, or the
    /// variant disagrees with the verdict.
    InconsistentVariant,
    WhenForbiddenForNormal,
    InvalidWhen(String),
    StrayText,
    NonCanonicalOrder { before: String, after: String },
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DiagnosticKind::*;
        match self {
            UnclosedTag(t) => write!(f, "unclosed tag: {t}"),
            UnexpectedClosingTag(t) => write!(f, "unexpected closing tag: {t}"),
            MisplacedTag { tag, parent } => write!(f, "tag {tag} not allowed inside {parent}"),
            UnknownTag(t) => write!(f, "unknown tag: {t}"),
            DuplicateTag(t) => write!(f, "duplicate tag: {t}"),
            MissingTag(t) => write!(f, "missing tag: {t}"),
            EmptySection(t) => write!(f, "empty section: {t}"),
            InconsistentVariant => f.write_str("inconsistent think variant"),
            WhenForbiddenForNormal => f.write_str("when forbidden for Normal"),
            InvalidWhen(p) => write!(f, "invalid when payload: {p:?}"),
            StrayText => f.write_str("stray text outside tags"),
            NonCanonicalOrder { before, after } => {
                write!(f, "non-canonical order: {before} before {after}")
            }
        }
    }
}

/// One finding with the byte span it refers to.
///
/// `strict` findings only fail [`validate_format`](super::validate_format);
/// the lenient parser accepts documents that have them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Range<usize>,
    pub strict: bool,
}

impl Diagnostic {
    pub(crate) fn error(kind: DiagnosticKind, span: Range<usize>) -> Self {
        Self { kind, span, strict: false }
    }

    pub(crate) fn strict(kind: DiagnosticKind, span: Range<usize>) -> Self {
        Self { kind, span, strict: true }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at bytes {}..{}", self.kind, self.span.start, self.span.end)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormatDiagnostics(pub Vec<Diagnostic>);

impl FormatDiagnostics {
    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, kind: &DiagnosticKind) -> bool {
        self.0.iter().any(|d| &d.kind == kind)
    }
}

impl fmt::Display for FormatDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}
