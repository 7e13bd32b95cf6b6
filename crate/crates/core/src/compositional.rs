//! Identity by composition: A1 (SDC changes), A2 (spatial changes), A3
//! (aggregates) and the GDC-change axiom, saturated together with mereological
//! extensionality and the congruence of functional relations.
//!
//! Rules come in two strata. Monotone rules (whose premises stay true as the
//! state grows) run to a fixpoint in any order. Closed-world rules, which
//! compare finite sets of participants, parts or witness lists, are then
//! evaluated against that fixpoint as one simultaneous batch. The two steps
//! alternate until neither adds anything, which makes the result independent
//! of rule order.

use std::collections::{BTreeMap, BTreeSet};

use crate::causal;
use crate::classification::{aggregate_witness, Kinds};
use crate::diagnostic::{Code, Diagnostic, Premise, Provenance, Rule};
use crate::error::EngineError;
use crate::mereology;
use crate::model::{EntityId, FactId, KnowledgeBase, Relation};
use crate::state::{Derivation, DerivationState};

/// Which identity criterion drives merging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Compositional,
    A5,
    C1,
    C2,
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "compositional" => Ok(Criterion::Compositional),
            "a5" => Ok(Criterion::A5),
            "c1" => Ok(Criterion::C1),
            "c2" => Ok(Criterion::C2),
            _ => Err(format!("unknown criterion `{s}`")),
        }
    }
}

/// Rules whose conclusions stay valid as equalities and distinctions grow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonotoneRule {
    Functional,
    A1,
    /// A2 distinctness from distinct temporal regions.
    A2Time,
    A3,
    Gdc,
    ExtMutual,
    ExtSum,
    C2,
}

/// Closed-world rules, evaluated as a batch against a fixpoint of the
/// monotone rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatchRule {
    /// A2 identity and distinctness from participant sets.
    A2Sets,
    /// A3 distinctness from witness lists.
    A3Neq,
    ExtComposite,
    A5,
    C1,
}

impl Criterion {
    pub fn monotone_rules(self, kb: &KnowledgeBase) -> Vec<MonotoneRule> {
        use MonotoneRule::*;
        match self {
            Criterion::Compositional => {
                let mut v = vec![Functional, A1, A2Time, A3, ExtMutual, ExtSum];
                if kb.options().extended_simple {
                    v.insert(4, Gdc);
                }
                v
            }
            Criterion::A5 | Criterion::C1 => vec![Functional, ExtMutual, ExtSum],
            Criterion::C2 => vec![Functional, ExtMutual, ExtSum, C2],
        }
    }

    pub fn batch_rules(self) -> Vec<BatchRule> {
        use BatchRule::*;
        match self {
            Criterion::Compositional => vec![A2Sets, A3Neq, ExtComposite],
            Criterion::A5 => vec![A5, ExtComposite],
            Criterion::C1 => vec![C1, ExtComposite],
            Criterion::C2 => vec![ExtComposite],
        }
    }
}

#[derive(Debug, Clone)]
pub enum Action {
    Merge(EntityId, EntityId, Provenance),
    Neq(EntityId, EntityId, Provenance),
}

pub(crate) fn apply_actions(state: &mut DerivationState, actions: Vec<Action>) -> bool {
    let mut changed = false;
    for a in actions {
        changed |= match a {
            Action::Merge(x, y, p) => state.merge(x, y, p),
            Action::Neq(x, y, p) => state.add_neq(x, y, p),
        };
    }
    changed
}

pub(crate) struct Ctx {
    pub kinds: Kinds,
}

impl Ctx {
    pub fn new(kb: &KnowledgeBase) -> Self {
        Ctx { kinds: Kinds::of(kb) }
    }
}

fn eq_premise(a: EntityId, b: EntityId) -> Option<Premise> {
    (a != b).then_some(if a < b { Premise::Eq(a, b) } else { Premise::Eq(b, a) })
}

fn neq_premise(a: EntityId, b: EntityId) -> Premise {
    if a < b {
        Premise::Neq(a, b)
    } else {
        Premise::Neq(b, a)
    }
}

/// Values of a binary relation, grouped by the class of the first argument:
/// class -> [(fact, subject, value)].
type Grouped = BTreeMap<EntityId, Entries>;
type Entries = Vec<(FactId, EntityId, EntityId)>;

fn grouped(kb: &KnowledgeBase, state: &DerivationState, rel: Relation) -> Grouped {
    let mut out: Grouped = BTreeMap::new();
    for (fid, f) in kb.facts_of(rel) {
        out.entry(state.find(f.arg(0))).or_default().push((fid, f.arg(0), f.arg(1)));
    }
    out
}

fn rule_functional(kb: &KnowledgeBase, state: &mut DerivationState) -> bool {
    let mut actions = Vec::new();
    for rel in Relation::ALL.into_iter().filter(|r| r.is_functional()) {
        for entries in grouped(kb, state, rel).values() {
            let (f0, s0, v0) = entries[0];
            for &(f, s, v) in &entries[1..] {
                if state.same(v0, v) {
                    continue;
                }
                let mut premises = vec![Premise::Fact(f0), Premise::Fact(f)];
                premises.extend(eq_premise(s0, s));
                actions.push(Action::Merge(v0, v, Provenance::new(Rule::Functional, premises)));
            }
        }
    }
    apply_actions(state, actions)
}

/// A1 and the GDC axiom share one shape: a change of a dependent continuant
/// is identified by that continuant and its temporal region.
fn dependent_change_actions(kb: &KnowledgeBase, state: &DerivationState, rel: Relation, rule: Rule) -> Vec<Action> {
    let changes = grouped(kb, state, rel);
    let times = grouped(kb, state, Relation::Otr);
    let eligible: Vec<(&Entries, &Entries)> =
        changes.iter().filter_map(|(c, ch)| times.get(c).map(|tm| (ch, tm))).collect();
    let mut actions = Vec::new();

    // p1 = p2 -> sdc1 = sdc2 and t1 = t2, inside each class
    for (ch, tm) in &eligible {
        for list in [*ch, *tm] {
            let (f0, s0, v0) = list[0];
            for &(f, s, v) in &list[1..] {
                if !state.same(v0, v) {
                    let mut premises = vec![Premise::Fact(f0), Premise::Fact(f)];
                    premises.extend(eq_premise(s0, s));
                    actions.push(Action::Merge(v0, v, Provenance::new(rule, premises)));
                }
            }
        }
    }

    // Distinctness is also concluded inside one class, where it surfaces as
    // a contradiction; this keeps the rule monotone.
    for (i, (ch1, tm1)) in eligible.iter().enumerate() {
        for (j, (ch2, tm2)) in eligible.iter().enumerate().skip(i) {
            let same_dep = pairs(ch1, ch2).find(|(a, b)| state.same(a.2, b.2));
            let same_time = pairs(tm1, tm2).find(|(a, b)| state.same(a.2, b.2));
            if let (true, Some((a, b)), Some((g, h))) = (i != j, same_dep, same_time) {
                let mut premises = vec![Premise::Fact(a.0), Premise::Fact(b.0), Premise::Fact(g.0), Premise::Fact(h.0)];
                premises.extend(eq_premise(a.2, b.2));
                premises.extend(eq_premise(g.2, h.2));
                premises.extend(eq_premise(a.1, g.1));
                premises.extend(eq_premise(b.1, h.1));
                actions.push(Action::Merge(a.1, b.1, Provenance::new(rule, premises)));
            }
            let witness =
                pairs(ch1, ch2).find(|(a, b)| state.distinct(a.2, b.2)).map(|(a, b)| (a, b, tm1[0], tm2[0])).or_else(
                    || pairs(tm1, tm2).find(|(g, h)| state.distinct(g.2, h.2)).map(|(g, h)| (ch1[0], ch2[0], g, h)),
                );
            if let Some((a, b, g, h)) = witness {
                let mut premises = vec![Premise::Fact(a.0), Premise::Fact(b.0), Premise::Fact(g.0), Premise::Fact(h.0)];
                if state.distinct(a.2, b.2) {
                    premises.push(neq_premise(a.2, b.2));
                } else {
                    premises.push(neq_premise(g.2, h.2));
                }
                premises.extend(eq_premise(a.1, g.1));
                premises.extend(eq_premise(b.1, h.1));
                actions.push(Action::Neq(a.1, b.1, Provenance::new(rule, premises)));
            }
        }
    }
    actions
}

fn pairs<'a, T: Copy>(xs: &'a [T], ys: &'a [T]) -> impl Iterator<Item = (T, T)> + 'a {
    xs.iter().flat_map(move |&x| ys.iter().map(move |&y| (x, y)))
}

/// Spatial-change classes with their temporal-region facts.
fn spatial_times(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> Grouped {
    let spatial = ctx.kinds.spatial_classes(state);
    grouped(kb, state, Relation::Otr).into_iter().filter(|(c, _)| spatial.contains(c)).collect()
}

fn a2_time_actions(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> Vec<Action> {
    let times: Vec<_> = spatial_times(kb, ctx, state).into_iter().collect();
    let mut actions = Vec::new();
    for (i, (_, tm1)) in times.iter().enumerate() {
        for (_, tm2) in &times[i..] {
            if let Some((g, h)) = pairs(tm1, tm2).find(|(g, h)| state.distinct(g.2, h.2)) {
                let premises = vec![Premise::Fact(g.0), Premise::Fact(h.0), neq_premise(g.2, h.2)];
                actions.push(Action::Neq(g.1, h.1, Provenance::new(Rule::A2, premises)));
            }
        }
    }
    actions
}

type Participants = (BTreeSet<EntityId>, Vec<(FactId, EntityId)>);

/// PCSP participants of each class: class -> (participant classes, facts).
fn participants(kb: &KnowledgeBase, state: &DerivationState) -> BTreeMap<EntityId, Participants> {
    let mut out: BTreeMap<EntityId, Participants> = BTreeMap::new();
    for (fid, f) in kb.facts_of(Relation::Pcsp) {
        let e = out.entry(state.find(f.arg(1))).or_default();
        e.0.insert(state.find(f.arg(0)));
        e.1.push((fid, f.arg(0)));
    }
    out
}

/// Some member of `xs` is recorded distinct from every member of `ys`.
pub(crate) fn provably_outside(
    state: &DerivationState,
    xs: &[(FactId, EntityId)],
    ys: &[(FactId, EntityId)],
) -> Option<(FactId, Vec<Premise>)> {
    xs.iter().find_map(|&(fx, x)| {
        ys.iter()
            .all(|&(_, y)| state.distinct(x, y))
            .then(|| (fx, ys.iter().flat_map(|&(fy, y)| [Premise::Fact(fy), neq_premise(x, y)]).collect()))
    })
}

fn a2_set_actions(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> Vec<Action> {
    let times: Vec<_> = spatial_times(kb, ctx, state).into_iter().collect();
    let parts = participants(kb, state);
    let empty = (BTreeSet::new(), Vec::new());
    let mut actions = Vec::new();
    for (i, (c1, tm1)) in times.iter().enumerate() {
        for (c2, tm2) in &times[i + 1..] {
            let (set1, facts1) = parts.get(c1).unwrap_or(&empty);
            let (set2, facts2) = parts.get(c2).unwrap_or(&empty);
            let (p1, p2) = (tm1[0].1, tm2[0].1);
            if set1 == set2 {
                if let Some((g, h)) = pairs(tm1, tm2).find(|(g, h)| state.same(g.2, h.2)) {
                    let mut premises = vec![Premise::Fact(g.0), Premise::Fact(h.0)];
                    premises.extend(eq_premise(g.2, h.2));
                    premises.extend(facts1.iter().chain(facts2).map(|&(f, _)| Premise::Fact(f)));
                    actions.push(Action::Merge(p1, p2, Provenance::new(Rule::A2, premises)));
                }
                continue;
            }
            let outside = provably_outside(state, facts1, facts2).or_else(|| provably_outside(state, facts2, facts1));
            if let Some((fx, mut premises)) = outside {
                premises.insert(0, Premise::Fact(fx));
                premises.push(Premise::Fact(tm1[0].0));
                premises.push(Premise::Fact(tm2[0].0));
                actions.push(Action::Neq(p1, p2, Provenance::new(Rule::A2, premises)));
            }
        }
    }
    actions
}

/// SUM facts whose parts are all simple, grouped by the class of the whole.
fn simple_sums(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> BTreeMap<EntityId, Vec<FactId>> {
    let simple = ctx.kinds.simple_classes(state);
    let mut out: BTreeMap<EntityId, Vec<FactId>> = BTreeMap::new();
    for (fid, f) in kb.facts_of(Relation::Sum) {
        if f.args[1..].iter().all(|&x| simple.contains(&state.find(x))) {
            out.entry(state.find(f.arg(0))).or_default().push(fid);
        }
    }
    out
}

fn a3_merge_actions(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> Vec<Action> {
    let sums: Vec<FactId> = simple_sums(kb, ctx, state).into_values().flatten().collect();
    let mut actions = Vec::new();
    for (i, &f1) in sums.iter().enumerate() {
        for &f2 in &sums[i + 1..] {
            let (w1, w2) = (kb.fact(f1).arg(0), kb.fact(f2).arg(0));
            if state.same(w1, w2)
                || mereology::sum_part_classes(kb, state, f1) != mereology::sum_part_classes(kb, state, f2)
            {
                continue;
            }
            let mut premises = vec![Premise::Fact(f1), Premise::Fact(f2)];
            premises.extend(mereology::list_match_premises(state, &kb.fact(f1).args[1..], &kb.fact(f2).args[1..]));
            actions.push(Action::Merge(w1, w2, Provenance::new(Rule::A3, premises)));
        }
    }
    actions
}

fn a3_neq_actions(kb: &KnowledgeBase, ctx: &Ctx, state: &DerivationState) -> Vec<Action> {
    let simple = ctx.kinds.simple_classes(state);
    let sums: Vec<(EntityId, Vec<FactId>)> = simple_sums(kb, ctx, state)
        .into_iter()
        .filter(|(c, _)| aggregate_witness(kb, state, &simple, *c).is_some())
        .collect();
    let list = |f: FactId| -> Vec<(FactId, EntityId)> { kb.fact(f).args[1..].iter().map(|&x| (f, x)).collect() };
    let mut actions = Vec::new();
    for (i, (_, l1)) in sums.iter().enumerate() {
        for (_, l2) in &sums[i + 1..] {
            let mut premises = Vec::new();
            let all_differ = pairs(l1, l2).all(|(f1, f2)| {
                let (a, b) = (list(f1), list(f2));
                match provably_outside(state, &a, &b).or_else(|| provably_outside(state, &b, &a)) {
                    Some((_, p)) => {
                        premises.push(Premise::Fact(f1));
                        premises.push(Premise::Fact(f2));
                        premises.extend(p);
                        true
                    }
                    None => false,
                }
            });
            if all_differ {
                premises.sort();
                premises.dedup();
                let (w1, w2) = (kb.fact(l1[0]).arg(0), kb.fact(l2[0]).arg(0));
                actions.push(Action::Neq(w1, w2, Provenance::new(Rule::A3, premises)));
            }
        }
    }
    actions
}

pub(crate) fn run_monotone(kb: &KnowledgeBase, ctx: &Ctx, rule: MonotoneRule, state: &mut DerivationState) -> bool {
    match rule {
        MonotoneRule::Functional => rule_functional(kb, state),
        MonotoneRule::A1 => {
            let a = dependent_change_actions(kb, state, Relation::Psdc, Rule::A1);
            apply_actions(state, a)
        }
        MonotoneRule::Gdc => {
            let a = dependent_change_actions(kb, state, Relation::Pgdc, Rule::Gdc);
            apply_actions(state, a)
        }
        MonotoneRule::A2Time => {
            let a = a2_time_actions(kb, ctx, state);
            apply_actions(state, a)
        }
        MonotoneRule::A3 => {
            let a = a3_merge_actions(kb, ctx, state);
            apply_actions(state, a)
        }
        MonotoneRule::ExtMutual => mereology::rule_mutual(kb, state),
        MonotoneRule::ExtSum => mereology::rule_sum(kb, state),
        MonotoneRule::C2 => {
            let a = causal::c2_actions(kb, state);
            apply_actions(state, a)
        }
    }
}

pub(crate) fn batch_actions(kb: &KnowledgeBase, ctx: &Ctx, rule: BatchRule, state: &DerivationState) -> Vec<Action> {
    match rule {
        BatchRule::A2Sets => a2_set_actions(kb, ctx, state),
        BatchRule::A3Neq => a3_neq_actions(kb, ctx, state),
        BatchRule::ExtComposite => {
            mereology::composite_candidates(kb, state).into_iter().map(|(a, b, p)| Action::Merge(a, b, p)).collect()
        }
        BatchRule::A5 => causal::a5_actions(kb, state),
        BatchRule::C1 => causal::c1_actions(kb, state),
    }
}

/// Final state of a saturation run plus its diagnostics (derived identities
/// and distinctions, then contradictions).
#[derive(Debug, Clone)]
pub struct Saturation {
    pub criterion: Criterion,
    pub state: DerivationState,
    pub diagnostics: Vec<Diagnostic>,
    pub rounds: usize,
}

impl Saturation {
    pub fn contradictions(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.code == crate::diagnostic::Code::Contradiction)
    }
}

/// Compositional saturation.
pub fn saturate(kb: &KnowledgeBase) -> Saturation {
    saturate_with(kb, Criterion::Compositional)
}

pub fn saturate_with(kb: &KnowledgeBase, criterion: Criterion) -> Saturation {
    let order = criterion.monotone_rules(kb);
    saturate_ordered(kb, criterion, &order, &criterion.batch_rules())
}

/// Saturation with an explicit rule order. Every order of the same rule sets
/// reaches the same classes and distinctions.
pub fn saturate_ordered(
    kb: &KnowledgeBase,
    criterion: Criterion,
    monotone: &[MonotoneRule],
    batch: &[BatchRule],
) -> Saturation {
    let ctx = Ctx::new(kb);
    let mut state = DerivationState::seeded(kb);
    let mut rounds = 0;
    loop {
        rounds += 1;
        loop {
            let mut changed = false;
            for &r in monotone {
                changed |= run_monotone(kb, &ctx, r, &mut state);
            }
            if !changed {
                break;
            }
        }
        let actions: Vec<Action> = batch.iter().flat_map(|&r| batch_actions(kb, &ctx, r, &state)).collect();
        if !apply_actions(&mut state, actions) {
            break;
        }
    }
    let mut diagnostics = state.derived_diagnostics(kb);
    diagnostics.extend(state.contradictions(kb));
    Saturation { criterion, state, diagnostics, rounds }
}

/// DERIVED_EQ/NEQ diagnostics for derivations recorded after the given marks.
pub(crate) fn report_since(kb: &KnowledgeBase, state: &DerivationState, merges: usize, neqs: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (code, list, verb) in [
        (Code::DerivedEq, &state.merges()[merges..], "identical"),
        (Code::DerivedNeq, &state.neqs()[neqs..], "distinct"),
    ] {
        for d in list {
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

fn one_pass(
    kb: &KnowledgeBase,
    state: &mut DerivationState,
    f: impl FnOnce(&KnowledgeBase, &Ctx, &DerivationState) -> Vec<Action>,
) -> Vec<Diagnostic> {
    let (m, n) = (state.merges().len(), state.neqs().len());
    let ctx = Ctx::new(kb);
    let actions = f(kb, &ctx, state);
    apply_actions(state, actions);
    report_since(kb, state, m, n)
}

/// One application of A1 in all three directions.
pub fn apply_a1(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    one_pass(kb, state, |kb, _, st| dependent_change_actions(kb, st, Relation::Psdc, Rule::A1))
}

pub fn apply_a2(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    one_pass(kb, state, |kb, ctx, st| {
        let mut a = a2_time_actions(kb, ctx, st);
        a.extend(a2_set_actions(kb, ctx, st));
        a
    })
}

pub fn apply_a3(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    one_pass(kb, state, |kb, ctx, st| {
        let mut a = a3_merge_actions(kb, ctx, st);
        a.extend(a3_neq_actions(kb, ctx, st));
        a
    })
}

pub fn apply_gdc_axiom(kb: &KnowledgeBase, state: &mut DerivationState) -> Result<Vec<Diagnostic>, EngineError> {
    if !kb.options().extended_simple {
        return Err(EngineError::FlagRequired("extended-simple"));
    }
    Ok(one_pass(kb, state, |kb, _, st| dependent_change_actions(kb, st, Relation::Pgdc, Rule::Gdc)))
}

/// Checks a recorded derivation against the final state: its premise facts
/// exist, its premise equalities and distinctions hold, and for the rules
/// with a fixed premise shape the conclusion follows from that shape.
pub fn replay(kb: &KnowledgeBase, state: &DerivationState, d: &Derivation, is_merge: bool) -> bool {
    let facts: Vec<FactId> =
        d.provenance.premises.iter().filter_map(|p| if let Premise::Fact(f) = p { Some(*f) } else { None }).collect();
    if facts.iter().any(|f| f.index() >= kb.facts().len()) {
        return false;
    }
    let relations_hold = d.provenance.premises.iter().all(|p| match *p {
        Premise::Fact(_) => true,
        Premise::Eq(a, b) => state.same(a, b),
        Premise::Neq(a, b) => state.distinct(a, b),
    });
    if !relations_hold {
        return false;
    }
    let concl = if is_merge { state.same(d.a, d.b) } else { state.distinct(d.a, d.b) || state.same(d.a, d.b) };
    if !concl {
        return false;
    }
    let f = |i: usize| kb.fact(facts[i]);
    let hits = |x: EntityId, y: EntityId| {
        (state.same(d.a, x) && state.same(d.b, y)) || (state.same(d.a, y) && state.same(d.b, x))
    };
    match d.provenance.rule {
        Rule::Assertion => {
            facts.len() == 1
                && f(0).relation == if is_merge { Relation::Eq } else { Relation::Neq }
                && hits(f(0).arg(0), f(0).arg(1))
        }
        Rule::Extent => match (kb.extent(d.a), kb.extent(d.b)) {
            (Some(x), Some(y)) => (x == y) == is_merge,
            _ => false,
        },
        Rule::Functional => {
            facts.len() == 2
                && f(0).relation == f(1).relation
                && f(0).relation.is_functional()
                && state.same(f(0).arg(0), f(1).arg(0))
                && hits(f(0).arg(1), f(1).arg(1))
        }
        Rule::A1 | Rule::Gdc if facts.len() == 4 => {
            let rel = if d.provenance.rule == Rule::A1 { Relation::Psdc } else { Relation::Pgdc };
            let (c1, c2, t1, t2) = (f(0), f(1), f(2), f(3));
            let shape = c1.relation == rel
                && c2.relation == rel
                && t1.relation == Relation::Otr
                && t2.relation == Relation::Otr
                && state.same(c1.arg(0), t1.arg(0))
                && state.same(c2.arg(0), t2.arg(0))
                && hits(c1.arg(0), c2.arg(0));
            let follows = if is_merge {
                state.same(c1.arg(1), c2.arg(1)) && state.same(t1.arg(1), t2.arg(1))
            } else {
                state.distinct(c1.arg(1), c2.arg(1)) || state.distinct(t1.arg(1), t2.arg(1))
            };
            shape && follows
        }
        _ => true,
    }
}
