//! Classical extensional mereology over declared entities, evaluated
//! closed-world and modulo the equalities of a [`DerivationState`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::diagnostic::{Diagnostic, Premise, Provenance, Rule};
use crate::error::EngineError;
use crate::model::{EntityId, FactId, KnowledgeBase, Relation};
use crate::state::DerivationState;

/// Reflexive-transitive closure of asserted `P` facts over equality classes.
pub struct Mereology<'a> {
    kb: &'a KnowledgeBase,
    rep: Vec<EntityId>,
    /// `up[r]` lists the classes `r` is part of (excluding `r`).
    up: HashMap<EntityId, BTreeSet<EntityId>>,
    /// Outgoing edges per class, labelled with the fact that induced them.
    edges: HashMap<EntityId, Vec<(EntityId, FactId)>>,
}

impl<'a> Mereology<'a> {
    /// Closure over the asserted facts alone, with no derived equalities.
    pub fn new(kb: &'a KnowledgeBase) -> Self {
        Self::with_state(kb, &DerivationState::for_kb(kb))
    }

    pub fn with_state(kb: &'a KnowledgeBase, state: &DerivationState) -> Self {
        let rep: Vec<EntityId> = kb.entity_ids().map(|e| state.find(e)).collect();
        let mut edges: HashMap<EntityId, Vec<(EntityId, FactId)>> = HashMap::new();
        for (fid, f) in kb.facts_of(Relation::P) {
            let (a, b) = (rep[f.arg(0).index()], rep[f.arg(1).index()]);
            if a != b {
                edges.entry(a).or_default().push((b, fid));
            }
        }
        let mut up = HashMap::new();
        for &start in edges.keys() {
            let mut seen = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                for &(n, _) in edges.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
            seen.remove(&start);
            up.insert(start, seen);
        }
        Mereology { kb, rep, up, edges }
    }

    fn class(&self, x: EntityId) -> EntityId {
        self.rep[x.index()]
    }

    pub fn part_of(&self, x: EntityId, y: EntityId) -> bool {
        let (cx, cy) = (self.class(x), self.class(y));
        cx == cy || self.up.get(&cx).is_some_and(|s| s.contains(&cy))
    }

    /// Some declared entity is part of both.
    pub fn overlap(&self, x: EntityId, y: EntityId) -> bool {
        self.kb.entity_ids().any(|z| self.part_of(z, x) && self.part_of(z, y))
    }

    /// Every listed part is part of `whole`, and every declared part of
    /// `whole` overlaps some listed part.
    pub fn sum_holds(&self, whole: EntityId, parts: &[EntityId]) -> bool {
        if !parts.iter().all(|&p| self.part_of(p, whole)) {
            return false;
        }
        self.kb.entity_ids().filter(|&z| self.part_of(z, whole)).all(|z| parts.iter().any(|&p| self.overlap(z, p)))
    }

    /// Declared entities that are part of `x` but not in its class.
    pub fn proper_parts(&self, x: EntityId) -> Vec<EntityId> {
        let cx = self.class(x);
        self.kb.entity_ids().filter(|&y| self.class(y) != cx && self.part_of(y, x)).collect()
    }

    /// Classes of the proper parts of `x`.
    pub fn proper_part_classes(&self, x: EntityId) -> BTreeSet<EntityId> {
        self.proper_parts(x).into_iter().map(|y| self.class(y)).collect()
    }

    /// Facts (and bridging equalities) along some `P` path from `x` up to `y`.
    pub fn path_premises(&self, x: EntityId, y: EntityId) -> Vec<Premise> {
        let (cx, cy) = (self.class(x), self.class(y));
        let mut prev: HashMap<EntityId, (EntityId, FactId)> = HashMap::new();
        let mut queue = VecDeque::from([cx]);
        while let Some(c) = queue.pop_front() {
            if c == cy {
                break;
            }
            for &(n, fid) in self.edges.get(&c).map(Vec::as_slice).unwrap_or(&[]) {
                if n != cx && !prev.contains_key(&n) {
                    prev.insert(n, (c, fid));
                    queue.push_back(n);
                }
            }
        }
        let mut facts = Vec::new();
        let mut cur = cy;
        while cur != cx {
            let Some(&(p, fid)) = prev.get(&cur) else { return Vec::new() };
            facts.push(fid);
            cur = p;
        }
        facts.reverse();
        let mut out = Vec::new();
        let mut at = x;
        for fid in facts {
            let f = self.kb.fact(fid);
            if f.arg(0) != at {
                out.push(Premise::Eq(at, f.arg(0)));
            }
            out.push(Premise::Fact(fid));
            at = f.arg(1);
        }
        if at != y {
            out.push(Premise::Eq(at, y));
        }
        out
    }
}

fn resolve(kb: &KnowledgeBase, name: &str) -> Result<EntityId, EngineError> {
    kb.lookup(name).ok_or_else(|| EngineError::UnknownEntity(name.to_string()))
}

pub fn part_of(kb: &KnowledgeBase, x: &str, y: &str) -> Result<bool, EngineError> {
    let (x, y) = (resolve(kb, x)?, resolve(kb, y)?);
    Ok(Mereology::new(kb).part_of(x, y))
}

pub fn overlap(kb: &KnowledgeBase, x: &str, y: &str) -> Result<bool, EngineError> {
    let (x, y) = (resolve(kb, x)?, resolve(kb, y)?);
    Ok(Mereology::new(kb).overlap(x, y))
}

pub fn sum_holds(kb: &KnowledgeBase, whole: &str, parts: &[&str]) -> Result<bool, EngineError> {
    if parts.is_empty() {
        return Err(EngineError::EmptyParts);
    }
    let whole = resolve(kb, whole)?;
    let parts = parts.iter().map(|p| resolve(kb, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(Mereology::new(kb).sum_holds(whole, &parts))
}

pub fn proper_parts(kb: &KnowledgeBase, x: &str) -> Result<BTreeSet<String>, EngineError> {
    let x = resolve(kb, x)?;
    Ok(Mereology::new(kb).proper_parts(x).into_iter().map(|e| kb.name(e).to_string()).collect())
}

/// Mutual parthood: classes on a common `P` cycle are merged.
pub(crate) fn rule_mutual(kb: &KnowledgeBase, state: &mut DerivationState) -> bool {
    let m = Mereology::with_state(kb, state);
    let mut pairs = Vec::new();
    for (fid, f) in kb.facts_of(Relation::P) {
        let (a, b) = (f.arg(0), f.arg(1));
        if !state.same(a, b) && m.part_of(b, a) {
            let mut premises = vec![Premise::Fact(fid)];
            premises.extend(m.path_premises(b, a));
            pairs.push((a, b, premises));
        }
    }
    let mut changed = false;
    for (a, b, premises) in pairs {
        changed |= state.merge(a, b, Provenance::new(Rule::ExtMutual, premises));
    }
    changed
}

/// Part lists of a SUM fact as a set of classes.
pub(crate) fn sum_part_classes(kb: &KnowledgeBase, state: &DerivationState, fid: FactId) -> BTreeSet<EntityId> {
    kb.fact(fid).args[1..].iter().map(|&p| state.find(p)).collect()
}

/// Eq premises witnessing that two part lists denote the same set of classes.
pub(crate) fn list_match_premises(state: &DerivationState, l1: &[EntityId], l2: &[EntityId]) -> Vec<Premise> {
    let mut out = BTreeSet::new();
    for (xs, ys) in [(l1, l2), (l2, l1)] {
        for &x in xs {
            if ys.contains(&x) {
                continue;
            }
            if let Some(&y) = ys.iter().find(|&&y| state.same(x, y)) {
                out.insert(if x < y { Premise::Eq(x, y) } else { Premise::Eq(y, x) });
            }
        }
    }
    out.into_iter().collect()
}

/// SUM is functional on the whole: equal part sets give equal wholes.
pub(crate) fn rule_sum(kb: &KnowledgeBase, state: &mut DerivationState) -> bool {
    let sums: Vec<FactId> = kb.facts_of(Relation::Sum).map(|(id, _)| id).collect();
    let mut changed = false;
    for (i, &f1) in sums.iter().enumerate() {
        for &f2 in &sums[i + 1..] {
            let (w1, w2) = (kb.fact(f1).arg(0), kb.fact(f2).arg(0));
            if state.same(w1, w2) || sum_part_classes(kb, state, f1) != sum_part_classes(kb, state, f2) {
                continue;
            }
            let mut premises = vec![Premise::Fact(f1), Premise::Fact(f2)];
            premises.extend(list_match_premises(state, &kb.fact(f1).args[1..], &kb.fact(f2).args[1..]));
            changed |= state.merge(w1, w2, Provenance::new(Rule::ExtSum, premises));
        }
    }
    changed
}

/// Candidate merges of composites with equal proper-part sets, computed
/// against one snapshot of `state`.
pub(crate) fn composite_candidates(
    kb: &KnowledgeBase,
    state: &DerivationState,
) -> Vec<(EntityId, EntityId, Provenance)> {
    let m = Mereology::with_state(kb, state);
    let mut by_parts: BTreeMap<BTreeSet<EntityId>, Vec<EntityId>> = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for e in kb.entity_ids() {
        let c = state.find(e);
        if !seen.insert(c) {
            continue;
        }
        let parts = m.proper_part_classes(e);
        if !parts.is_empty() {
            by_parts.entry(parts).or_default().push(e);
        }
    }
    let mut out = Vec::new();
    for group in by_parts.values().filter(|g| g.len() > 1) {
        let first = group[0];
        for &other in &group[1..] {
            let mut premises = Vec::new();
            for z in m.proper_parts(first) {
                premises.extend(m.path_premises(z, first));
            }
            for z in m.proper_parts(other) {
                premises.extend(m.path_premises(z, other));
            }
            premises.sort();
            premises.dedup();
            out.push((first, other, Provenance::new(Rule::ExtComposite, premises)));
        }
    }
    out
}

/// One application of all three extensionality rules. Returns DERIVED_EQ
/// diagnostics for the merges it made.
pub fn derive_extensional_identities(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    let before = state.merges().len();
    rule_mutual(kb, state);
    rule_sum(kb, state);
    for (a, b, prov) in composite_candidates(kb, state) {
        state.merge(a, b, prov);
    }
    let mut fresh = DerivationState::for_kb(kb);
    for d in &state.merges()[before..] {
        fresh.merge(d.a, d.b, d.provenance.clone());
    }
    fresh.derived_diagnostics(kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::Code;
    use crate::model::{KbBuilder, Options};
    use crate::taxonomy::Category;

    fn kb(entities: &[(&str, Category)], facts: &[(Relation, &[&str])]) -> KnowledgeBase {
        let mut b = KbBuilder::new(Options::default());
        for (id, c) in entities {
            b.add_entity(id, *c, None).unwrap();
        }
        for (r, args) in facts {
            b.assert_fact(*r, args).unwrap();
        }
        b.finish()
    }

    fn procs(names: &[&'static str]) -> Vec<(&'static str, Category)> {
        names.iter().map(|n| (*n, Category::Process)).collect()
    }

    #[test]
    fn asserted_part_and_reflexivity() {
        let kb = kb(&procs(&["upper_rot", "p_rot"]), &[(Relation::P, &["upper_rot", "p_rot"])]);
        assert!(part_of(&kb, "upper_rot", "p_rot").unwrap());
        assert!(!part_of(&kb, "p_rot", "upper_rot").unwrap());
        assert!(part_of(&kb, "p_rot", "p_rot").unwrap());
        assert!(matches!(part_of(&kb, "p_rot", "nope"), Err(EngineError::UnknownEntity(_))));
    }

    #[test]
    fn transitive_chain() {
        let kb = kb(&procs(&["a", "b", "c"]), &[(Relation::P, &["a", "b"]), (Relation::P, &["b", "c"])]);
        assert!(part_of(&kb, "a", "c").unwrap());
        assert_eq!(proper_parts(&kb, "c").unwrap(), ["a", "b"].iter().map(|s| s.to_string()).collect());
        assert!(proper_parts(&kb, "a").unwrap().is_empty());
    }

    #[test]
    fn overlap_cases() {
        let kb = kb(&procs(&["a", "b", "c", "d"]), &[(Relation::P, &["c", "a"]), (Relation::P, &["c", "b"])]);
        assert!(overlap(&kb, "a", "a").unwrap());
        assert!(overlap(&kb, "a", "b").unwrap());
        assert!(!overlap(&kb, "a", "d").unwrap());
    }

    #[test]
    fn sum_holds_cases() {
        let kb = kb(
            &procs(&["p_agg", "p_rot", "p_heat", "extra", "w"]),
            &[
                (Relation::P, &["p_rot", "p_agg"]),
                (Relation::P, &["p_heat", "p_agg"]),
                (Relation::P, &["p_rot", "w"]),
                (Relation::P, &["p_heat", "w"]),
                (Relation::P, &["extra", "w"]),
            ],
        );
        assert!(sum_holds(&kb, "p_agg", &["p_rot", "p_heat"]).unwrap());
        assert!(sum_holds(&kb, "p_agg", &["p_agg"]).unwrap());
        assert!(!sum_holds(&kb, "w", &["p_rot", "p_heat"]).unwrap());
        assert_eq!(sum_holds(&kb, "w", &[]), Err(EngineError::EmptyParts));
    }

    #[test]
    fn equal_sum_lists_merge_wholes() {
        let kb = kb(
            &procs(&["y1", "y2", "a", "b"]),
            &[(Relation::Sum, &["y1", "a", "b"]), (Relation::Sum, &["y2", "b", "a"])],
        );
        let mut st = DerivationState::for_kb(&kb);
        let diags = derive_extensional_identities(&kb, &mut st);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, Code::DerivedEq);
        assert_eq!(diags[0].subjects, vec!["y1", "y2"]);
    }

    #[test]
    fn no_composites_no_diagnostics() {
        let kb = kb(&procs(&["a", "b"]), &[]);
        let mut st = DerivationState::for_kb(&kb);
        assert!(derive_extensional_identities(&kb, &mut st).is_empty());
    }

    #[test]
    fn mutual_parthood_merges() {
        let kb = kb(&procs(&["a", "b"]), &[(Relation::P, &["a", "b"]), (Relation::P, &["b", "a"])]);
        let mut st = DerivationState::for_kb(&kb);
        let diags = derive_extensional_identities(&kb, &mut st);
        assert_eq!(diags.len(), 1);
        assert!(st.same(kb.lookup("a").unwrap(), kb.lookup("b").unwrap()));
        assert_eq!(diags[0].provenance.as_ref().unwrap().rule, Rule::ExtMutual);
    }

    #[test]
    fn composites_with_same_parts_merge() {
        let kb = kb(
            &procs(&["x1", "x2", "a", "b"]),
            &[
                (Relation::P, &["a", "x1"]),
                (Relation::P, &["b", "x1"]),
                (Relation::P, &["a", "x2"]),
                (Relation::P, &["b", "x2"]),
            ],
        );
        let mut st = DerivationState::for_kb(&kb);
        derive_extensional_identities(&kb, &mut st);
        assert!(st.same(kb.lookup("x1").unwrap(), kb.lookup("x2").unwrap()));
        // atoms are never merged
        assert!(!st.same(kb.lookup("a").unwrap(), kb.lookup("b").unwrap()));
    }

    #[test]
    fn temporal_subprocesses_are_benign() {
        let kb = kb(
            &procs(&["walk", "walk_first_half", "walk_second_half"]),
            &[(Relation::P, &["walk_first_half", "walk"]), (Relation::P, &["walk_second_half", "walk"])],
        );
        let mut st = DerivationState::for_kb(&kb);
        assert!(derive_extensional_identities(&kb, &mut st).is_empty());
        assert!(!st.has_contradiction());
    }

    #[test]
    fn path_premises_follow_facts() {
        let kb = kb(&procs(&["a", "b", "c"]), &[(Relation::P, &["a", "b"]), (Relation::P, &["b", "c"])]);
        let m = Mereology::new(&kb);
        let prem = m.path_premises(kb.lookup("a").unwrap(), kb.lookup("c").unwrap());
        assert_eq!(prem, vec![Premise::Fact(FactId(0)), Premise::Fact(FactId(1))]);
    }
}
