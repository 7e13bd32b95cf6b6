//! Quality expansion: a quality of a part induces a corresponding quality of
//! each whole the part belongs to.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::mereology::Mereology;
use crate::model::{EntityId, KnowledgeBase, Relation};
use crate::state::DerivationState;
use crate::taxonomy::Category;

/// One added quality and the quality it corresponds to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Correspondence {
    pub added: String,
    pub original: String,
    pub bearer: String,
}

/// Connected components of the CORRESPONDS graph, by entity.
fn components(kb: &KnowledgeBase) -> DerivationState {
    let mut st = DerivationState::for_kb(kb);
    for (fid, f) in kb.facts_of(Relation::Corresponds) {
        st.merge(
            f.arg(0),
            f.arg(1),
            crate::diagnostic::Provenance::new(
                crate::diagnostic::Rule::Assertion,
                vec![crate::diagnostic::Premise::Fact(fid)],
            ),
        );
    }
    st
}

fn fresh_name(kb: &KnowledgeBase, taken: &BTreeSet<String>, q: &str, x: &str) -> String {
    let base = format!("{q}@{x}");
    let mut name = base.clone();
    let mut n = 2;
    while kb.lookup(&name).is_some() || taken.contains(&name) {
        name = format!("{base}.{n}");
        n += 1;
    }
    name
}

/// For each quality `q` inhering in `y`, and each independent continuant `x`
/// having `y` as a proper part, adds a quality `q@x` inhering in `x`, links it
/// by CORRESPONDS to `q`, and copies `q`'s timed instantiations. A whole
/// already bearing a quality in `q`'s correspondence component is skipped, so
/// a second run adds nothing.
pub fn expand_qualities(kb: &KnowledgeBase) -> (KnowledgeBase, Vec<Correspondence>) {
    let state = DerivationState::seeded(kb);
    let m = Mereology::with_state(kb, &state);
    let corr = components(kb);
    let bearer: BTreeMap<EntityId, EntityId> = kb.facts_of(Relation::Inh).map(|(_, f)| (f.arg(0), f.arg(1))).collect();
    let wholes: Vec<EntityId> = kb.declared_in(Category::IndependentContinuant).collect();

    let mut planned: Vec<(EntityId, EntityId)> = Vec::new();
    for (&q, &y) in &bearer {
        if !kb.declared_is_a(q, Category::Quality) {
            continue;
        }
        for &x in &wholes {
            if state.same(x, y) || !m.part_of(y, x) {
                continue;
            }
            let covered = bearer.iter().any(|(&q2, &b)| state.same(b, x) && corr.same(q2, q));
            if !covered {
                planned.push((q, x));
            }
        }
    }

    let mut b = kb.to_builder();
    let mut taken = BTreeSet::new();
    let mut out = Vec::new();
    for (q, x) in planned {
        let (qn, xn) = (kb.name(q), kb.name(x));
        let name = fresh_name(kb, &taken, qn, xn);
        taken.insert(name.clone());
        let e = kb.entity(q);
        b.add_entity(&name, e.category, None).expect("fresh id");
        b.assert_fact(Relation::Inh, &[name.as_str(), xn]).expect("quality inheres in continuant");
        b.assert_fact(Relation::Corresponds, &[name.as_str(), qn]).expect("both qualities");
        for (_, f) in kb.facts_of(Relation::InstanceOfAt).filter(|(_, f)| f.arg(0) == q) {
            let mut args = kb.fact_arg_names(f);
            args[0] = name.clone();
            b.assert_fact(Relation::InstanceOfAt, &args).expect("mirrored instantiation");
        }
        out.push(Correspondence { added: name, original: qn.to_string(), bearer: xn.to_string() });
    }
    out.sort();
    (b.finish(), out)
}
