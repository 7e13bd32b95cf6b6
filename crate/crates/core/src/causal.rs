//! Identity by realization: realization profiles, A5, the alternative
//! criteria C1 (timed participants) and C2 (spatiotemporal region), history
//! checks and the side-by-side comparison of criteria.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::compositional::{saturate_with, Action, Criterion};
use crate::diagnostic::{Code, Diagnostic, Premise, Provenance, Rule};
use crate::error::EngineError;
use crate::mereology::Mereology;
use crate::model::{EntityId, FactId, KnowledgeBase, Relation};
use crate::state::DerivationState;
use crate::taxonomy::Category;

/// A realization `REAL(disposition, process, time)`, asserted or obtained by
/// pushing an asserted one down to a part of its process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub disposition: EntityId,
    pub process: EntityId,
    pub time: EntityId,
    pub premises: Vec<Premise>,
    pub derived: bool,
}

fn asserted(kb: &KnowledgeBase) -> Vec<Realization> {
    kb.facts_of(Relation::Real)
        .map(|(id, f)| Realization {
            disposition: f.arg(0),
            process: f.arg(1),
            time: f.arg(2),
            premises: vec![Premise::Fact(id)],
            derived: false,
        })
        .collect()
}

/// If `d` is realized in `p`, it is realized in every part `q` of `p`
/// during `q`'s own temporal region.
fn closure(kb: &KnowledgeBase, state: &DerivationState, base: &[Realization]) -> Vec<Realization> {
    let m = Mereology::with_state(kb, state);
    let otr: Vec<(FactId, EntityId, EntityId)> =
        kb.facts_of(Relation::Otr).map(|(id, f)| (id, f.arg(0), f.arg(1))).collect();
    let mut seen: BTreeSet<(EntityId, EntityId, EntityId)> =
        base.iter().map(|r| (state.find(r.disposition), state.find(r.process), state.find(r.time))).collect();
    let mut out = Vec::new();
    for r in base {
        for &(of, q, tq) in &otr {
            if state.same(q, r.process) || !m.part_of(q, r.process) {
                continue;
            }
            if !seen.insert((state.find(r.disposition), state.find(q), state.find(tq))) {
                continue;
            }
            let mut premises = r.premises.clone();
            premises.extend(m.path_premises(q, r.process));
            premises.push(Premise::Fact(of));
            out.push(Realization { disposition: r.disposition, process: q, time: tq, premises, derived: true });
        }
    }
    out
}

/// Asserted realizations, plus their parthood closure when
/// `parthood-realization` is enabled.
pub fn realizations(kb: &KnowledgeBase, state: &DerivationState) -> Vec<Realization> {
    let mut all = asserted(kb);
    if kb.options().parthood_realization {
        let extra = closure(kb, state, &all);
        all.extend(extra);
    }
    all
}

/// Only the realizations the parthood rule adds.
pub fn parthood_realization_closure(kb: &KnowledgeBase) -> Result<Vec<Realization>, EngineError> {
    if !kb.options().parthood_realization {
        return Err(EngineError::FlagRequired("parthood-realization"));
    }
    let state = DerivationState::seeded(kb);
    Ok(closure(kb, &state, &asserted(kb)))
}

/// Realization profile of a process as (disposition, time) pairs, each named
/// by the canonical member of its class.
pub fn realization_profile(kb: &KnowledgeBase, p: &str) -> Result<BTreeSet<(String, String)>, EngineError> {
    let id = kb.lookup(p).ok_or_else(|| EngineError::UnknownEntity(p.to_string()))?;
    if !kb.declared_is_a(id, Category::Process) {
        return Err(EngineError::NotAProcess(p.to_string()));
    }
    let state = DerivationState::seeded(kb);
    Ok(realizations(kb, &state)
        .into_iter()
        .filter(|r| state.same(r.process, id))
        .map(|r| (state.canonical_name(kb, r.disposition).to_string(), state.canonical_name(kb, r.time).to_string()))
        .collect())
}

/// Profiles per process class: class -> (class-level entries, realizations).
type Profiles = BTreeMap<EntityId, (BTreeSet<(EntityId, EntityId)>, Vec<Realization>)>;

fn profiles(kb: &KnowledgeBase, state: &DerivationState) -> Profiles {
    let mut out: Profiles = BTreeMap::new();
    for r in realizations(kb, state) {
        let e = out.entry(state.find(r.process)).or_default();
        e.0.insert((state.find(r.disposition), state.find(r.time)));
        e.1.push(r);
    }
    out
}

/// Some entry of `xs` is distinct from every entry of `ys`, in disposition or
/// in time.
fn profile_outside(state: &DerivationState, xs: &[Realization], ys: &[Realization]) -> Option<Vec<Premise>> {
    xs.iter().find_map(|x| {
        let mut premises = x.premises.clone();
        for y in ys {
            premises.extend(y.premises.iter().copied());
            if state.distinct(x.disposition, y.disposition) {
                premises.push(neq(x.disposition, y.disposition));
            } else if state.distinct(x.time, y.time) {
                premises.push(neq(x.time, y.time));
            } else {
                return None;
            }
        }
        Some(premises)
    })
}

fn neq(a: EntityId, b: EntityId) -> Premise {
    if a < b {
        Premise::Neq(a, b)
    } else {
        Premise::Neq(b, a)
    }
}

fn dedup(mut v: Vec<Premise>) -> Vec<Premise> {
    v.sort();
    v.dedup();
    v
}

/// A5 over nonempty profiles: equal profiles merge, provably different
/// profiles are distinct.
pub(crate) fn a5_actions(kb: &KnowledgeBase, state: &DerivationState) -> Vec<Action> {
    let profiles: Vec<_> = profiles(kb, state).into_iter().collect();
    let mut actions = Vec::new();
    for (i, (_, (set1, r1))) in profiles.iter().enumerate() {
        for (_, (set2, r2)) in &profiles[i + 1..] {
            let (p1, p2) = (r1[0].process, r2[0].process);
            if set1 == set2 {
                let premises = r1.iter().chain(r2).flat_map(|r| r.premises.iter().copied()).collect();
                actions.push(Action::Merge(p1, p2, Provenance::new(Rule::A5, dedup(premises))));
            } else if let Some(premises) = profile_outside(state, r1, r2).or_else(|| profile_outside(state, r2, r1)) {
                actions.push(Action::Neq(p1, p2, Provenance::new(Rule::A5, dedup(premises))));
            }
        }
    }
    actions
}

/// One simultaneous application of A5.
pub fn apply_a5(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    apply_and_report(kb, state, a5_actions)
}

fn apply_and_report(
    kb: &KnowledgeBase,
    state: &mut DerivationState,
    f: fn(&KnowledgeBase, &DerivationState) -> Vec<Action>,
) -> Vec<Diagnostic> {
    let (m, n) = (state.merges().len(), state.neqs().len());
    let actions = f(kb, state);
    crate::compositional::apply_actions(state, actions);
    crate::compositional::report_since(kb, state, m, n)
}

/// (participant class, time class) pairs and the PC facts behind them.
type TimedParticipants = (BTreeSet<(EntityId, EntityId)>, Vec<FactId>);

/// Timed participants per process class: class -> (set of (participant, time)
/// classes, PC facts).
fn timed_participants(kb: &KnowledgeBase, state: &DerivationState) -> BTreeMap<EntityId, TimedParticipants> {
    let mut out: BTreeMap<EntityId, TimedParticipants> = BTreeMap::new();
    for (id, f) in kb.facts_of(Relation::Pc) {
        let e = out.entry(state.find(f.arg(1))).or_default();
        e.0.insert((state.find(f.arg(0)), state.find(f.arg(2))));
        e.1.push(id);
    }
    out
}

/// C1 merges processes with the same nonempty set of timed participants.
pub(crate) fn c1_actions(kb: &KnowledgeBase, state: &DerivationState) -> Vec<Action> {
    let groups: Vec<_> = timed_participants(kb, state).into_iter().collect();
    let mut actions = Vec::new();
    for (i, (_, (s1, f1))) in groups.iter().enumerate() {
        for (_, (s2, f2)) in &groups[i + 1..] {
            if s1 == s2 {
                let (p1, p2) = (kb.fact(f1[0]).arg(1), kb.fact(f2[0]).arg(1));
                let premises = f1.iter().chain(f2).map(|&f| Premise::Fact(f)).collect();
                actions.push(Action::Merge(p1, p2, Provenance::new(Rule::C1, premises)));
            }
        }
    }
    actions
}

pub fn apply_c1(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    apply_and_report(kb, state, c1_actions)
}

pub(crate) fn c2_actions(kb: &KnowledgeBase, state: &DerivationState) -> Vec<Action> {
    let ostr: Vec<(FactId, EntityId, EntityId)> =
        kb.facts_of(Relation::Ostr).map(|(id, f)| (id, f.arg(0), f.arg(1))).collect();
    let mut actions = Vec::new();
    for (i, &(f1, p1, r1)) in ostr.iter().enumerate() {
        for &(f2, p2, r2) in &ostr[i + 1..] {
            if !state.same(p1, p2) && state.same(r1, r2) {
                actions.push(Action::Merge(
                    p1,
                    p2,
                    Provenance::new(Rule::C2, vec![Premise::Fact(f1), Premise::Fact(f2)]),
                ));
            }
        }
    }
    actions
}

pub fn apply_c2(kb: &KnowledgeBase, state: &mut DerivationState) -> Vec<Diagnostic> {
    apply_and_report(kb, state, c2_actions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict3 {
    Same,
    Different,
    Undetermined,
}

impl Verdict3 {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict3::Same => "SAME",
            Verdict3::Different => "DIFFERENT",
            Verdict3::Undetermined => "UNDETERMINED",
        }
    }
}

impl std::fmt::Display for Verdict3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComparisonRow {
    pub p1: String,
    pub p2: String,
    pub c1: Verdict3,
    pub c2: Verdict3,
    pub a5: Verdict3,
    pub compositional: Verdict3,
    /// Some criterion says SAME while another says DIFFERENT.
    pub disagreement: bool,
}

fn from_state(state: &DerivationState, a: EntityId, b: EntityId) -> Verdict3 {
    if state.same(a, b) {
        Verdict3::Same
    } else if state.distinct(a, b) {
        Verdict3::Different
    } else {
        Verdict3::Undetermined
    }
}

/// Closed-world comparison of two finite sets; undetermined when either is empty.
fn set_verdict<T: Ord>(a: Option<&BTreeSet<T>>, b: Option<&BTreeSet<T>>) -> Verdict3 {
    match (a, b) {
        (Some(a), Some(b)) if !a.is_empty() && !b.is_empty() => {
            if a == b {
                Verdict3::Same
            } else {
                Verdict3::Different
            }
        }
        _ => Verdict3::Undetermined,
    }
}

/// Every pair of declared processes judged by the four criteria. C1 and C2
/// are read closed-world off the asserted facts; A5 and the compositional
/// axioms come from their saturations.
pub fn compare_criteria(kb: &KnowledgeBase) -> Vec<ComparisonRow> {
    let base = DerivationState::seeded(kb);
    let comp = saturate_with(kb, Criterion::Compositional).state;
    let a5 = saturate_with(kb, Criterion::A5).state;
    let timed: BTreeMap<EntityId, BTreeSet<(EntityId, EntityId)>> =
        timed_participants(kb, &base).into_iter().map(|(k, v)| (k, v.0)).collect();
    let mut regions: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
    for (_, f) in kb.facts_of(Relation::Ostr) {
        regions.entry(base.find(f.arg(0))).or_default().insert(base.find(f.arg(1)));
    }
    let mut procs: Vec<EntityId> = kb.declared_in(Category::Process).collect();
    procs.sort_by(|a, b| kb.name(*a).cmp(kb.name(*b)));
    let mut rows = Vec::new();
    for (i, &a) in procs.iter().enumerate() {
        for &b in &procs[i + 1..] {
            let c1 = set_verdict(timed.get(&base.find(a)), timed.get(&base.find(b)));
            let c2 = match (regions.get(&base.find(a)), regions.get(&base.find(b))) {
                (Some(ra), Some(rb)) => {
                    if ra.iter().any(|x| rb.contains(x)) {
                        Verdict3::Same
                    } else {
                        Verdict3::Different
                    }
                }
                _ => Verdict3::Undetermined,
            };
            let a5v = from_state(&a5, a, b);
            let cv = from_state(&comp, a, b);
            let all = [c1, c2, a5v, cv];
            let disagreement = all.contains(&Verdict3::Same) && all.contains(&Verdict3::Different);
            rows.push(ComparisonRow {
                p1: kb.name(a).to_string(),
                p2: kb.name(b).to_string(),
                c1,
                c2,
                a5: a5v,
                compositional: cv,
                disagreement,
            });
        }
    }
    rows
}

fn region_of(kb: &KnowledgeBase, state: &DerivationState, p: EntityId) -> Option<(FactId, EntityId)> {
    kb.facts_of(Relation::Ostr).find(|(_, f)| state.same(f.arg(0), p)).map(|(id, f)| (id, f.arg(1)))
}

/// Checks that `history` is the sum of exactly the processes occurring within
/// the spatiotemporal region of its bearer, taken to be the history's own
/// OSTR region.
pub fn history_check(kb: &KnowledgeBase, history: &str, bearer: &str) -> Result<Vec<Diagnostic>, EngineError> {
    let h = kb.lookup(history).ok_or_else(|| EngineError::UnknownEntity(history.to_string()))?;
    let x = kb.lookup(bearer).ok_or_else(|| EngineError::UnknownEntity(bearer.to_string()))?;
    if !kb.declared_is_a(h, Category::History) {
        return Err(EngineError::WrongCategory { id: history.to_string(), expected: Category::History });
    }
    if !kb.declared_is_a(x, Category::MaterialEntity) {
        return Err(EngineError::WrongCategory { id: bearer.to_string(), expected: Category::MaterialEntity });
    }
    let state = DerivationState::seeded(kb);
    let (hf, hr) = region_of(kb, &state, h).ok_or_else(|| EngineError::MissingOstr(history.to_string()))?;
    let m = Mereology::with_state(kb, &state);
    let mut out = Vec::new();
    let name = |e: EntityId| kb.name(e).to_string();

    let procs: Vec<EntityId> = kb.declared_in(Category::Process).filter(|&p| !state.same(p, h)).collect();
    for &p in &procs {
        let region = region_of(kb, &state, p);
        let inside = region.is_some_and(|(_, r)| m.part_of(r, hr));
        if m.part_of(p, h) {
            match region {
                None => out.push(
                    Diagnostic::new(
                        Code::MissingOstr,
                        vec![name(p)],
                        format!("`{}` is part of history `{history}` but has no OSTR fact", name(p)),
                    )
                    .with_span(kb.entity_span(p).cloned()),
                ),
                Some((pf, r)) if !inside => out.push(
                    Diagnostic::new(
                        Code::HistoryViolation,
                        vec![name(h), name(p)],
                        format!(
                            "`{}` is part of history `{history}` but occupies `{}`, outside `{}`",
                            name(p),
                            name(r),
                            name(hr)
                        ),
                    )
                    .with_provenance(Provenance::new(Rule::History, vec![Premise::Fact(hf), Premise::Fact(pf)]))
                    .with_span(kb.entity_span(p).cloned()),
                ),
                _ => {}
            }
        } else if let (true, Some((pf, r))) = (inside, region) {
            out.push(
                Diagnostic::new(
                    Code::HistoryViolation,
                    vec![name(h), name(p)],
                    format!(
                        "`{}` occupies `{}` within `{}` but is not part of history `{history}`",
                        name(p),
                        name(r),
                        name(hr)
                    ),
                )
                .with_provenance(Provenance::new(Rule::History, vec![Premise::Fact(hf), Premise::Fact(pf)]))
                .with_span(kb.entity_span(p).cloned()),
            );
        }
    }

    // Realizations of the bearer's own dispositions that reach beyond it.
    let bearer_dispositions: BTreeSet<EntityId> =
        kb.facts_of(Relation::Inh).filter(|(_, f)| m.part_of(f.arg(1), x)).map(|(_, f)| state.find(f.arg(0))).collect();
    let real = realizations(kb, &state);
    let mut reported = BTreeSet::new();
    for r in real.iter().filter(|r| bearer_dispositions.contains(&state.find(r.disposition))) {
        let p = r.process;
        if m.part_of(p, h) {
            continue;
        }
        let Some((_, region)) = region_of(kb, &state, p) else { continue };
        if m.part_of(region, hr) || !reported.insert(state.find(p)) {
            continue;
        }
        out.push(
            Diagnostic::new(
                Code::HistoryExcluded,
                vec![name(h), name(p)],
                format!(
                    "`{}` realizes `{}` of `{bearer}` but extends beyond `{}`, so it is not part of `{history}`",
                    name(p),
                    name(r.disposition),
                    name(hr)
                ),
            )
            .with_provenance(Provenance::new(Rule::History, dedup(r.premises.clone()))),
        );
        for q in real.iter().filter(|q| state.same(q.disposition, r.disposition)) {
            if !state.same(q.process, p) && m.part_of(q.process, p) && m.part_of(q.process, h) {
                out.push(
                    Diagnostic::new(
                        Code::HistoryIncluded,
                        vec![name(h), name(q.process)],
                        format!(
                            "part `{}` of `{}` also realizes `{}` and lies within `{history}`",
                            name(q.process),
                            name(p),
                            name(r.disposition)
                        ),
                    )
                    .with_provenance(Provenance::new(Rule::History, dedup(q.premises.clone()))),
                );
            }
        }
    }
    crate::diagnostic::sort_diagnostics(&mut out);
    out.dedup();
    Ok(out)
}
