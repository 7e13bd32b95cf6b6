use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::model::{EntityId, FactId};

/// Location of a parsed item in its source text. Lines and columns are 1-based,
/// `col_end` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub line: usize,
    pub col_start: usize,
    pub col_end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col_start)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    ParseError,
    DuplicateId,
    UnknownCategory,
    UnknownEntity,
    DomainViolation,
    FunctionalityViolation,
    CrossBranch,
    InvalidInterval,
    UnresolvedClass,
    PdhViolation,
    A4Violation,
    StrictParticipation,
    Contradiction,
    HistoryViolation,
    MissingOstr,
    HistoryExcluded,
    HistoryIncluded,
    DerivedEq,
    DerivedNeq,
    Classified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Info,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        use Code::*;
        match self {
            ParseError => "PARSE_ERROR",
            DuplicateId => "DUPLICATE_ID",
            UnknownCategory => "UNKNOWN_CATEGORY",
            UnknownEntity => "UNKNOWN_ENTITY",
            DomainViolation => "DOMAIN_VIOLATION",
            FunctionalityViolation => "FUNCTIONALITY_VIOLATION",
            CrossBranch => "CROSS_BRANCH",
            InvalidInterval => "INVALID_INTERVAL",
            UnresolvedClass => "UNRESOLVED_CLASS",
            PdhViolation => "PDH_VIOLATION",
            A4Violation => "A4_VIOLATION",
            StrictParticipation => "STRICT_PARTICIPATION",
            Contradiction => "CONTRADICTION",
            HistoryViolation => "HISTORY_VIOLATION",
            MissingOstr => "MISSING_OSTR",
            HistoryExcluded => "HISTORY_EXCLUDED",
            HistoryIncluded => "HISTORY_INCLUDED",
            DerivedEq => "DERIVED_EQ",
            DerivedNeq => "DERIVED_NEQ",
            Classified => "CLASSIFIED",
        }
    }

    pub fn severity(self) -> Severity {
        use Code::*;
        match self {
            HistoryExcluded | HistoryIncluded | DerivedEq | DerivedNeq | Classified => Severity::Info,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// The rule (axiom, definition or bookkeeping step) that produced a derived fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Assertion,
    Extent,
    Functional,
    A1,
    A2,
    A3,
    Gdc,
    /// Mutual parthood.
    ExtMutual,
    /// Equal SUM part lists.
    ExtSum,
    /// Equal proper-part sets of composites.
    ExtComposite,
    A4,
    A5,
    C1,
    C2,
    D1,
    D2,
    Pdh,
    Parthood,
    History,
    Validation,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        use Rule::*;
        match self {
            Assertion => "ASSERT",
            Extent => "EXTENT",
            Functional => "FUNC",
            A1 => "A1",
            A2 => "A2",
            A3 => "A3",
            Gdc => "GDC",
            ExtMutual => "EXT-MUTUAL",
            ExtSum => "EXT-SUM",
            ExtComposite => "EXT-COMPOSITE",
            A4 => "A4",
            A5 => "A5",
            C1 => "C1",
            C2 => "C2",
            D1 => "D1",
            D2 => "D2",
            Pdh => "PDH",
            Parthood => "PARTHOOD",
            History => "HISTORY",
            Validation => "SIGNATURE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A premise a derivation depends on: a stored fact, or an equality /
/// distinction that held in the derivation state when the rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Premise {
    Fact(FactId),
    Eq(EntityId, EntityId),
    Neq(EntityId, EntityId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Provenance {
    pub rule: Rule,
    pub premises: Vec<Premise>,
}

impl Provenance {
    pub fn new(rule: Rule, premises: Vec<Premise>) -> Self {
        Provenance { rule, premises }
    }

    pub fn bare(rule: Rule) -> Self {
        Provenance { rule, premises: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: Code,
    pub subjects: Vec<String>,
    pub provenance: Option<Provenance>,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(code: Code, subjects: Vec<String>, message: impl Into<String>) -> Self {
        Diagnostic { code, subjects, provenance: None, message: message.into(), span: None }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
        self.span = span;
        self
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }

    /// Sort key used by reports: code, then subjects, then message.
    pub fn sort_key(&self) -> (&'static str, &[String], &str, Option<&SourceSpan>) {
        (self.code.as_str(), &self.subjects, &self.message, self.span.as_ref())
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{} [{}] {}", self.code, self.subjects.join(", "), self.message)
    }
}

pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}
