//! Canonical text rendering of a knowledge base.

use std::fmt::Write;

use crate::model::{KnowledgeBase, Relation};

pub const HEADER: &str = "# procid knowledge base";

/// Options, classes, entities (sorted by id), intervals, facts (sorted by
/// relation then arguments), then `eq`/`neq` lines.
pub fn serialize(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for flag in kb.options().enabled() {
        writeln!(out, "option {flag}").unwrap();
    }
    for c in kb.classes() {
        match c.determinable {
            Some(d) => writeln!(out, "class {} determinable-of {d}", c.name).unwrap(),
            None => writeln!(out, "class {}", c.name).unwrap(),
        }
    }
    let mut entities: Vec<_> = kb.entities().iter().collect();
    entities.sort_by(|a, b| a.id.cmp(&b.id));
    for e in &entities {
        match &e.label {
            Some(l) => writeln!(out, "entity {} : {} \"{l}\"", e.id, e.category).unwrap(),
            None => writeln!(out, "entity {} : {}", e.id, e.category).unwrap(),
        }
    }
    for e in &entities {
        if let Some(x) = e.extent {
            writeln!(out, "interval {} = {x}", e.id).unwrap();
        }
    }
    let mut facts: Vec<(Relation, Vec<String>)> =
        kb.facts().iter().map(|f| (f.relation, kb.fact_arg_names(f))).collect();
    facts.sort();
    for (rel, args) in facts {
        let kw = if matches!(rel, Relation::Eq | Relation::Neq) { "" } else { "fact " };
        writeln!(out, "{kw}{rel}({})", args.join(", ")).unwrap();
    }
    out
}
