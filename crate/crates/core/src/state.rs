//! Equality classes and distinctions derived during saturation.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::diagnostic::{Code, Diagnostic, Premise, Provenance, Rule};
use crate::model::{EntityId, Interval, KnowledgeBase, Relation};
use crate::taxonomy::Category;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub a: EntityId,
    pub b: EntityId,
    pub provenance: Provenance,
}

/// Union-find over entity ids plus a set of distinctness assertions, each
/// recorded with the rule and premises that produced it.
#[derive(Debug, Clone)]
pub struct DerivationState {
    parent: Vec<u32>,
    size: Vec<u32>,
    merges: Vec<Derivation>,
    neqs: Vec<Derivation>,
    neq_classes: HashSet<(u32, u32)>,
}

fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl DerivationState {
    pub fn new(n: usize) -> Self {
        DerivationState {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            merges: Vec::new(),
            neqs: Vec::new(),
            neq_classes: HashSet::new(),
        }
    }

    pub fn for_kb(kb: &KnowledgeBase) -> Self {
        Self::new(kb.len())
    }

    /// State holding only what the KB states outright: asserted `eq`/`neq`,
    /// plus identity or distinctness of temporal regions whose extents are
    /// both known.
    pub fn seeded(kb: &KnowledgeBase) -> Self {
        let mut st = Self::for_kb(kb);
        st.seed(kb);
        st
    }

    pub(crate) fn seed(&mut self, kb: &KnowledgeBase) {
        for (fid, f) in kb.facts_of(Relation::Eq) {
            self.merge(f.arg(0), f.arg(1), Provenance::new(Rule::Assertion, vec![Premise::Fact(fid)]));
        }
        for (fid, f) in kb.facts_of(Relation::Neq) {
            self.add_neq(f.arg(0), f.arg(1), Provenance::new(Rule::Assertion, vec![Premise::Fact(fid)]));
        }
        let timed: Vec<(EntityId, Interval)> =
            kb.declared_in(Category::TemporalRegion).filter_map(|t| kb.extent(t).map(|x| (t, x))).collect();
        for (i, &(a, xa)) in timed.iter().enumerate() {
            for &(b, xb) in &timed[i + 1..] {
                if xa == xb {
                    self.merge(a, b, Provenance::bare(Rule::Extent));
                } else {
                    self.add_neq(a, b, Provenance::bare(Rule::Extent));
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&self, x: EntityId) -> EntityId {
        let mut i = x.0;
        while self.parent[i as usize] != i {
            i = self.parent[i as usize];
        }
        EntityId(i)
    }

    pub fn same(&self, a: EntityId, b: EntityId) -> bool {
        self.find(a) == self.find(b)
    }

    /// `a` and `b` lie in classes recorded as distinct.
    pub fn distinct(&self, a: EntityId, b: EntityId) -> bool {
        let (ra, rb) = (self.find(a).0, self.find(b).0);
        self.neq_classes.contains(&ordered(ra, rb))
    }

    /// Merges the classes of `a` and `b`; returns false if already merged.
    pub fn merge(&mut self, a: EntityId, b: EntityId, provenance: Provenance) -> bool {
        let (ra, rb) = (self.find(a).0, self.find(b).0);
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.merges.push(Derivation { a, b, provenance });
        self.rebuild_neq();
        true
    }

    /// Records that `a` and `b` are distinct; returns false if their classes
    /// were already recorded as distinct.
    pub fn add_neq(&mut self, a: EntityId, b: EntityId, provenance: Provenance) -> bool {
        let key = ordered(self.find(a).0, self.find(b).0);
        if !self.neq_classes.insert(key) {
            return false;
        }
        self.neqs.push(Derivation { a, b, provenance });
        true
    }

    fn rebuild_neq(&mut self) {
        let keys: HashSet<_> = self.neqs.iter().map(|d| ordered(self.find(d.a).0, self.find(d.b).0)).collect();
        self.neq_classes = keys;
    }

    pub fn merges(&self) -> &[Derivation] {
        &self.merges
    }

    pub fn neqs(&self) -> &[Derivation] {
        &self.neqs
    }

    pub fn class_count(&self) -> usize {
        (0..self.parent.len()).filter(|&i| self.parent[i] == i as u32).count()
    }

    pub fn members(&self, x: EntityId) -> Vec<EntityId> {
        let r = self.find(x);
        (0..self.parent.len() as u32).map(EntityId).filter(|&e| self.find(e) == r).collect()
    }

    /// Name of the lexicographically smallest member of `x`'s class.
    pub fn canonical_name<'a>(&self, kb: &'a KnowledgeBase, x: EntityId) -> &'a str {
        let r = self.find(x);
        kb.entity_ids().filter(|&e| self.find(e) == r).map(|e| kb.name(e)).min().unwrap_or("")
    }

    /// Every class as a sorted list of names; the list of classes is sorted too.
    pub fn partition(&self, kb: &KnowledgeBase) -> Vec<Vec<String>> {
        let mut groups: BTreeMap<EntityId, Vec<String>> = BTreeMap::new();
        for e in kb.entity_ids() {
            groups.entry(self.find(e)).or_default().push(kb.name(e).to_string());
        }
        let mut out: Vec<Vec<String>> = groups
            .into_values()
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        out.sort();
        out
    }

    /// Only classes with more than one member.
    pub fn nontrivial_partition(&self, kb: &KnowledgeBase) -> Vec<Vec<String>> {
        self.partition(kb).into_iter().filter(|c| c.len() > 1).collect()
    }

    /// Distinct class pairs, each named by its canonical member.
    pub fn neq_pairs(&self, kb: &KnowledgeBase) -> BTreeSet<(String, String)> {
        self.neq_classes
            .iter()
            .map(|&(a, b)| {
                let x = self.canonical_name(kb, EntityId(a)).to_string();
                let y = self.canonical_name(kb, EntityId(b)).to_string();
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            })
            .collect()
    }

    /// One CONTRADICTION per recorded distinction whose two sides ended up in
    /// the same class.
    pub fn contradictions(&self, kb: &KnowledgeBase) -> Vec<Diagnostic> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for d in &self.neqs {
            if !self.same(d.a, d.b) {
                continue;
            }
            let (x, y) = {
                let (x, y) = (kb.name(d.a), kb.name(d.b));
                if x <= y {
                    (x, y)
                } else {
                    (y, x)
                }
            };
            if !seen.insert((x.to_string(), y.to_string())) {
                continue;
            }
            let mut premises = d.provenance.premises.clone();
            premises.push(Premise::Eq(d.a, d.b));
            let span = premises.iter().find_map(|p| match p {
                Premise::Fact(f) => kb.fact_span(*f).cloned(),
                _ => None,
            });
            out.push(
                Diagnostic::new(
                    Code::Contradiction,
                    vec![x.to_string(), y.to_string()],
                    format!("`{x}` and `{y}` are both identical and distinct"),
                )
                .with_provenance(Provenance::new(d.provenance.rule, premises))
                .with_span(span),
            );
        }
        out
    }

    pub fn has_contradiction(&self) -> bool {
        self.neqs.iter().any(|d| self.same(d.a, d.b))
    }

    /// DERIVED_EQ / DERIVED_NEQ diagnostics for everything not stated by the KB
    /// itself (asserted `eq`/`neq` or interval extents).
    pub fn derived_diagnostics(&self, kb: &KnowledgeBase) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (code, list, verb) in
            [(Code::DerivedEq, &self.merges, "identical"), (Code::DerivedNeq, &self.neqs, "distinct")]
        {
            for d in list.iter().filter(|d| !matches!(d.provenance.rule, Rule::Assertion | Rule::Extent)) {
                let (x, y) = (kb.name(d.a), kb.name(d.b));
                let mut subjects = vec![x.to_string(), y.to_string()];
                subjects.sort();
                out.push(
                    Diagnostic::new(code, subjects, format!("`{x}` and `{y}` are {verb} by {}", d.provenance.rule))
                        .with_provenance(d.provenance.clone()),
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: u32) -> EntityId {
        EntityId(i)
    }

    #[test]
    fn merge_and_find() {
        let mut s = DerivationState::new(4);
        assert!(s.merge(e(0), e(1), Provenance::bare(Rule::Assertion)));
        assert!(!s.merge(e(1), e(0), Provenance::bare(Rule::Assertion)));
        assert!(s.same(e(0), e(1)));
        assert!(!s.same(e(0), e(2)));
        assert_eq!(s.class_count(), 3);
    }

    #[test]
    fn neq_follows_merges() {
        let mut s = DerivationState::new(4);
        assert!(s.add_neq(e(0), e(2), Provenance::bare(Rule::Assertion)));
        assert!(!s.add_neq(e(2), e(0), Provenance::bare(Rule::Assertion)));
        s.merge(e(2), e(3), Provenance::bare(Rule::Assertion));
        assert!(s.distinct(e(0), e(3)));
        assert!(!s.has_contradiction());
        s.merge(e(0), e(3), Provenance::bare(Rule::Assertion));
        assert!(s.has_contradiction());
    }

    #[test]
    fn self_distinction_is_contradiction() {
        let mut s = DerivationState::new(1);
        s.add_neq(e(0), e(0), Provenance::bare(Rule::Assertion));
        assert!(s.has_contradiction());
    }
}
