//! Reports in text and JSON form, with a deterministic ordering.

use std::fmt::Write;

use serde::Serialize;

use crate::causal::ComparisonRow;
use crate::diagnostic::{sort_diagnostics, Code, Diagnostic, Premise, Severity, SourceSpan};
use crate::model::KnowledgeBase;

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub diagnostics: Vec<Diagnostic>,
    pub eq_classes: Vec<Vec<String>>,
    pub criteria: Vec<ComparisonRow>,
}

#[derive(Serialize)]
struct JsonProvenance<'a> {
    rule: &'a str,
    premises: Vec<String>,
}

#[derive(Serialize)]
struct JsonDiagnostic<'a> {
    code: Code,
    severity: Severity,
    subjects: &'a [String],
    provenance: Option<JsonProvenance<'a>>,
    message: &'a str,
    span: Option<&'a SourceSpan>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    diagnostics: Vec<JsonDiagnostic<'a>>,
    eq_classes: &'a [Vec<String>],
    criteria: &'a [ComparisonRow],
}

pub fn render_premise(kb: &KnowledgeBase, p: &Premise) -> String {
    match *p {
        Premise::Fact(f) => kb.render_fact(kb.fact(f)),
        Premise::Eq(a, b) => format!("eq({}, {})", kb.name(a), kb.name(b)),
        Premise::Neq(a, b) => format!("neq({}, {})", kb.name(a), kb.name(b)),
    }
}

impl Report {
    pub fn new(
        mut diagnostics: Vec<Diagnostic>,
        mut eq_classes: Vec<Vec<String>>,
        criteria: Vec<ComparisonRow>,
    ) -> Self {
        sort_diagnostics(&mut diagnostics);
        for c in &mut eq_classes {
            c.sort();
        }
        eq_classes.sort();
        Report { diagnostics, eq_classes, criteria }
    }

    /// 2 for parse errors, 1 for any other error-severity diagnostic, else 0.
    pub fn exit_status(&self) -> i32 {
        if self.diagnostics.iter().any(|d| d.code == Code::ParseError) {
            2
        } else if self.diagnostics.iter().any(Diagnostic::is_error) {
            1
        } else {
            0
        }
    }

    pub fn count(&self, code: Code) -> usize {
        self.diagnostics.iter().filter(|d| d.code == code).count()
    }

    pub fn to_json(&self, kb: &KnowledgeBase) -> String {
        let diagnostics = self
            .diagnostics
            .iter()
            .map(|d| JsonDiagnostic {
                code: d.code,
                severity: d.severity(),
                subjects: &d.subjects,
                provenance: d.provenance.as_ref().map(|p| JsonProvenance {
                    rule: p.rule.as_str(),
                    premises: p.premises.iter().map(|x| render_premise(kb, x)).collect(),
                }),
                message: &d.message,
                span: d.span.as_ref(),
            })
            .collect();
        let r = JsonReport { diagnostics, eq_classes: &self.eq_classes, criteria: &self.criteria };
        serde_json::to_string_pretty(&r).expect("report serializes")
    }

    pub fn to_text(&self, kb: &KnowledgeBase) -> String {
        let mut out = String::new();
        for d in &self.diagnostics {
            let sev = match d.severity() {
                Severity::Error => "error",
                Severity::Info => "info",
            };
            if let Some(span) = &d.span {
                write!(out, "{span}: ").unwrap();
            }
            writeln!(out, "{sev} {} [{}] {}", d.code, d.subjects.join(", "), d.message).unwrap();
            if let Some(p) = &d.provenance {
                let premises: Vec<String> = p.premises.iter().map(|x| render_premise(kb, x)).collect();
                if premises.is_empty() {
                    writeln!(out, "    by {}", p.rule).unwrap();
                } else {
                    writeln!(out, "    by {} from {}", p.rule, premises.join("; ")).unwrap();
                }
            }
        }
        if !self.eq_classes.is_empty() {
            writeln!(out, "equality classes:").unwrap();
            for c in &self.eq_classes {
                writeln!(out, "    {{{}}}", c.join(", ")).unwrap();
            }
        }
        if !self.criteria.is_empty() {
            let w1 = self.criteria.iter().map(|r| r.p1.chars().count()).max().unwrap_or(0).max(2);
            let w2 = self.criteria.iter().map(|r| r.p2.chars().count()).max().unwrap_or(0).max(2);
            writeln!(
                out,
                "{:w1$}  {:w2$}  {:12}  {:12}  {:12}  {:13}  disagreement",
                "p1", "p2", "c1", "c2", "a5", "compositional"
            )
            .unwrap();
            for r in &self.criteria {
                writeln!(
                    out,
                    "{:w1$}  {:w2$}  {:12}  {:12}  {:12}  {:13}  {}",
                    r.p1,
                    r.p2,
                    r.c1.as_str(),
                    r.c2.as_str(),
                    r.a5.as_str(),
                    r.compositional.as_str(),
                    if r.disagreement { "yes" } else { "no" }
                )
                .unwrap();
            }
        }
        let errors = self.diagnostics.iter().filter(|d| d.is_error()).count();
        writeln!(out, "{errors} error(s), {} note(s)", self.diagnostics.len() - errors).unwrap();
        out
    }
}
