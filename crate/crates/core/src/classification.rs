//! Deriving process categories from facts, and the well-formedness checks
//! that depend on them (PDH, A4, determinate exclusivity, participation).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::causal;
use crate::diagnostic::{Code, Diagnostic, Premise, Provenance, Rule};
use crate::error::EngineError;
use crate::mereology::Mereology;
use crate::model::{EntityId, FactId, KnowledgeBase, Relation};
use crate::state::DerivationState;
use crate::taxonomy::Category;

/// Outcome of a single classifier together with the facts that justify it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub provenance: Vec<FactId>,
}

impl Verdict {
    fn no() -> Self {
        Verdict { holds: false, provenance: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateVerdict {
    pub holds: bool,
    /// The SUM fact whose part list witnesses the classification.
    pub sum_fact: Option<FactId>,
    pub witnesses: Vec<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationResult {
    pub subject: EntityId,
    pub derived: BTreeSet<Category>,
    pub provenance: Vec<FactId>,
}

fn process(kb: &KnowledgeBase, name: &str) -> Result<EntityId, EngineError> {
    let id = kb.lookup(name).ok_or_else(|| EngineError::UnknownEntity(name.to_string()))?;
    if !kb.declared_is_a(id, Category::Process) {
        return Err(EngineError::NotAProcess(name.to_string()));
    }
    Ok(id)
}

/// Per-entity process kinds computed once per KB; equality lifting is done by
/// the callers that hold a [`DerivationState`].
#[derive(Debug, Clone)]
pub(crate) struct Kinds {
    pub sdcc: HashSet<EntityId>,
    pub spatial: HashSet<EntityId>,
    pub gdc: HashSet<EntityId>,
}

impl Kinds {
    pub fn of(kb: &KnowledgeBase) -> Self {
        let sdcc = kb.facts_of(Relation::Psdc).map(|(_, f)| f.arg(0)).collect();
        let gdc = if kb.options().extended_simple {
            kb.facts_of(Relation::Pgdc).map(|(_, f)| f.arg(0)).collect()
        } else {
            HashSet::new()
        };
        let base = DerivationState::seeded(kb);
        let spatial = kb
            .declared_in(Category::Process)
            .filter(|&p| !spatial_witness(kb, &base, p).is_empty() || kb.category(p) == Category::SpatialChange)
            .collect();
        Kinds { sdcc, spatial, gdc }
    }

    pub fn is_simple(&self, p: EntityId) -> bool {
        self.sdcc.contains(&p) || self.spatial.contains(&p) || self.gdc.contains(&p)
    }

    /// Classes (by representative) containing at least one simple process.
    pub fn simple_classes(&self, state: &DerivationState) -> HashSet<EntityId> {
        self.sdcc.iter().chain(&self.spatial).chain(&self.gdc).map(|&p| state.find(p)).collect()
    }

    pub fn spatial_classes(&self, state: &DerivationState) -> HashSet<EntityId> {
        self.spatial.iter().map(|&p| state.find(p)).collect()
    }
}

/// `locatedAt` facts showing a participant of `p` (or a part of one) at two
/// different regions at two different times.
fn spatial_witness(kb: &KnowledgeBase, base: &DerivationState, p: EntityId) -> Vec<FactId> {
    let located: Vec<(FactId, EntityId, EntityId, EntityId)> =
        kb.facts_of(Relation::LocatedAt).map(|(id, f)| (id, f.arg(0), f.arg(1), f.arg(2))).collect();
    if located.is_empty() {
        return Vec::new();
    }
    let participants: BTreeSet<EntityId> = kb
        .facts_of(Relation::Pcsp)
        .filter(|(_, f)| f.arg(1) == p)
        .map(|(_, f)| f.arg(0))
        .chain(kb.facts_of(Relation::Pc).filter(|(_, f)| f.arg(1) == p).map(|(_, f)| f.arg(0)))
        .collect();
    let m = Mereology::new(kb);
    for &x in &participants {
        for (i, &(f1, y1, r1, t1)) in located.iter().enumerate() {
            if !m.part_of(y1, x) {
                continue;
            }
            for &(f2, y2, r2, t2) in &located[i + 1..] {
                if y2 == y1 && !base.same(r1, r2) && !base.same(t1, t2) {
                    return vec![f1, f2];
                }
            }
        }
    }
    Vec::new()
}

pub fn classify_sdcc(kb: &KnowledgeBase, p: &str) -> Result<Verdict, EngineError> {
    let p = process(kb, p)?;
    let facts: Vec<FactId> = kb.facts_of(Relation::Psdc).filter(|(_, f)| f.arg(0) == p).map(|(id, _)| id).collect();
    Ok(Verdict { holds: !facts.is_empty(), provenance: facts })
}

pub fn classify_spatial(kb: &KnowledgeBase, p: &str) -> Result<Verdict, EngineError> {
    let p = process(kb, p)?;
    if kb.category(p) == Category::SpatialChange {
        return Ok(Verdict { holds: true, provenance: Vec::new() });
    }
    let witness = spatial_witness(kb, &DerivationState::seeded(kb), p);
    Ok(if witness.is_empty() { Verdict::no() } else { Verdict { holds: true, provenance: witness } })
}

fn classify_gdc(kb: &KnowledgeBase, p: EntityId) -> Verdict {
    if !kb.options().extended_simple {
        return Verdict::no();
    }
    let facts: Vec<FactId> = kb.facts_of(Relation::Pgdc).filter(|(_, f)| f.arg(0) == p).map(|(id, _)| id).collect();
    Verdict { holds: !facts.is_empty(), provenance: facts }
}

pub fn classify_simple(kb: &KnowledgeBase, p: &str) -> Result<bool, EngineError> {
    let id = process(kb, p)?;
    Ok(classify_sdcc(kb, p)?.holds || classify_spatial(kb, p)?.holds || classify_gdc(kb, id).holds)
}

/// D2 against a given state: some SUM fact makes (a member of) `p`'s class
/// the sum of simple processes, two of which lie in different classes. Part
/// lists mentioning `p`'s own class are not witnesses.
pub(crate) fn aggregate_witness(
    kb: &KnowledgeBase,
    state: &DerivationState,
    simple: &HashSet<EntityId>,
    p: EntityId,
) -> Option<FactId> {
    kb.facts_of(Relation::Sum)
        .filter(|(_, f)| state.same(f.arg(0), p))
        .find(|(_, f)| {
            let parts = &f.args[1..];
            parts.iter().all(|&x| simple.contains(&state.find(x)) && !state.same(x, p))
                && parts.iter().any(|&x| !state.same(x, parts[0]))
        })
        .map(|(id, _)| id)
}

pub fn classify_aggregate(kb: &KnowledgeBase, p: &str) -> Result<AggregateVerdict, EngineError> {
    let p = process(kb, p)?;
    let state = DerivationState::seeded(kb);
    let simple = Kinds::of(kb).simple_classes(&state);
    Ok(match aggregate_witness(kb, &state, &simple, p) {
        Some(fid) => AggregateVerdict { holds: true, sum_fact: Some(fid), witnesses: kb.fact(fid).args[1..].to_vec() },
        None => AggregateVerdict { holds: false, sum_fact: None, witnesses: Vec::new() },
    })
}

/// Declared or derived membership of `id` in `category`.
pub fn is_in_category(kb: &KnowledgeBase, id: &str, category: Category) -> Result<bool, EngineError> {
    let e = kb.lookup(id).ok_or_else(|| EngineError::UnknownEntity(id.to_string()))?;
    if kb.declared_is_a(e, category) {
        return Ok(true);
    }
    if !kb.declared_is_a(e, Category::Process) {
        return Ok(false);
    }
    let r = classify(kb, e);
    Ok(r.derived.iter().any(|c| c.is_a(category)))
}

/// All derived process categories of one process.
pub fn classify(kb: &KnowledgeBase, p: EntityId) -> ClassificationResult {
    let name = kb.name(p);
    let mut derived = BTreeSet::new();
    let mut provenance = Vec::new();
    if let Ok(v) = classify_sdcc(kb, name) {
        if v.holds {
            derived.insert(Category::SdcChange);
            provenance.extend(v.provenance);
        }
    }
    if let Ok(v) = classify_spatial(kb, name) {
        if v.holds {
            derived.insert(Category::SpatialChange);
            provenance.extend(v.provenance);
        }
    }
    let g = classify_gdc(kb, p);
    if g.holds {
        derived.insert(Category::GdcChange);
        provenance.extend(g.provenance);
    }
    if !derived.is_empty() {
        derived.insert(Category::SimpleProcess);
    }
    if let Ok(a) = classify_aggregate(kb, name) {
        if a.holds {
            derived.insert(Category::ProcessAggregate);
            provenance.extend(a.sum_fact);
        }
    }
    ClassificationResult { subject: p, derived, provenance }
}

/// CLASSIFIED diagnostics for every declared process.
pub fn classify_all(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    kb.declared_in(Category::Process)
        .map(|p| {
            let r = classify(kb, p);
            let cats: Vec<&str> = r.derived.iter().map(|c| c.name()).collect();
            let rule = if r.derived.contains(&Category::ProcessAggregate) { Rule::D2 } else { Rule::D1 };
            let msg = if cats.is_empty() { "no derived process category".to_string() } else { cats.join(", ") };
            Diagnostic::new(Code::Classified, vec![kb.name(p).to_string()], msg)
                .with_provenance(Provenance::new(rule, r.provenance.into_iter().map(Premise::Fact).collect()))
        })
        .collect()
}

/// Every process must be simple or an aggregate.
pub fn check_pdh(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let state = DerivationState::seeded(kb);
    let kinds = Kinds::of(kb);
    let simple = kinds.simple_classes(&state);
    kb.declared_in(Category::Process)
        .filter(|&p| !kinds.is_simple(p) && aggregate_witness(kb, &state, &simple, p).is_none())
        .map(|p| {
            let hint = if !kb.options().extended_simple && kb.facts_of(Relation::Pgdc).any(|(_, f)| f.arg(0) == p) {
                " (it is a GDC change; enable extended-simple to count it as simple)"
            } else {
                ""
            };
            Diagnostic::new(
                Code::PdhViolation,
                vec![kb.name(p).to_string()],
                format!("`{}` is neither a simple process nor a process aggregate{hint}", kb.name(p)),
            )
            .with_provenance(Provenance::bare(Rule::Pdh))
            .with_span(kb.entity_span(p).cloned())
        })
        .collect()
}

/// Every process realizes a disposition of one of its participants at the
/// time it participates.
pub fn check_a4(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let state = DerivationState::seeded(kb);
    check_a4_with(kb, &state)
}

pub(crate) fn check_a4_with(kb: &KnowledgeBase, state: &DerivationState) -> Vec<Diagnostic> {
    let real = causal::realizations(kb, state);
    let inh: Vec<(FactId, EntityId, EntityId)> =
        kb.facts_of(Relation::Inh).map(|(id, f)| (id, f.arg(0), f.arg(1))).collect();
    let pcs: Vec<(FactId, EntityId, EntityId, EntityId)> =
        kb.facts_of(Relation::Pc).map(|(id, f)| (id, f.arg(0), f.arg(1), f.arg(2))).collect();
    let mut out = Vec::new();
    for p in kb.declared_in(Category::Process) {
        let witnessed = pcs.iter().filter(|pc| state.same(pc.2, p)).any(|&(_, x, _, t)| {
            real.iter()
                .filter(|r| state.same(r.process, p) && state.same(r.time, t))
                .any(|r| inh.iter().any(|&(_, d, bearer)| state.same(d, r.disposition) && state.same(bearer, x)))
        });
        if !witnessed {
            out.push(
                Diagnostic::new(
                    Code::A4Violation,
                    vec![kb.name(p).to_string()],
                    format!("`{}` realizes no disposition of a participant at a time it participates", kb.name(p)),
                )
                .with_provenance(Provenance::bare(Rule::A4))
                .with_span(kb.entity_span(p).cloned()),
            );
        }
    }
    out
}

/// Timed instantiation checks. With `exclusive-determinates`, one entity
/// instantiating two determinates of the same determinable at the same time
/// is a contradiction. Class names never declared are reported either way.
pub fn check_instantiation(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    let state = DerivationState::seeded(kb);
    let mut out = Vec::new();
    let inst: Vec<(FactId, EntityId, &str, EntityId)> = kb
        .facts_of(Relation::InstanceOfAt)
        .map(|(id, f)| (id, f.arg(0), f.class.as_deref().unwrap_or(""), f.arg(1)))
        .collect();
    for &(fid, _, class, _) in &inst {
        if !kb.has_class(class) {
            out.push(
                Diagnostic::new(
                    Code::UnresolvedClass,
                    vec![class.to_string()],
                    format!("class `{class}` is not declared"),
                )
                .with_span(kb.fact_span(fid).cloned()),
            );
        }
    }
    if kb.options().exclusive_determinates {
        let mut seen = BTreeSet::new();
        for (i, &(f1, e1, c1, t1)) in inst.iter().enumerate() {
            for &(f2, e2, c2, t2) in &inst[i + 1..] {
                let (Some(d1), Some(d2)) = (kb.determinable_of(c1), kb.determinable_of(c2)) else { continue };
                if c1 == c2 || d1 != d2 || !state.same(e1, e2) || !state.same(t1, t2) {
                    continue;
                }
                let (a, b) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
                if !seen.insert((kb.name(state.find(e1)).to_string(), a, b, state.find(t1))) {
                    continue;
                }
                out.push(
                    Diagnostic::new(
                        Code::Contradiction,
                        vec![kb.name(e1).to_string(), a.to_string(), b.to_string()],
                        format!("`{}` instantiates two determinates of `{d1}` at `{}`", kb.name(e1), kb.name(t1)),
                    )
                    .with_provenance(Provenance::new(Rule::Validation, vec![Premise::Fact(f1), Premise::Fact(f2)]))
                    .with_span(kb.fact_span(f2).cloned()),
                );
            }
        }
    }
    out
}

/// With `strict-participation`, every simple process has exactly one PCSP
/// participant.
pub fn check_strict_participation(kb: &KnowledgeBase) -> Vec<Diagnostic> {
    if !kb.options().strict_participation {
        return Vec::new();
    }
    let kinds = Kinds::of(kb);
    let mut counts: BTreeMap<EntityId, BTreeSet<EntityId>> = BTreeMap::new();
    for (_, f) in kb.facts_of(Relation::Pcsp) {
        counts.entry(f.arg(1)).or_default().insert(f.arg(0));
    }
    kb.declared_in(Category::Process)
        .filter(|&p| kinds.is_simple(p))
        .filter_map(|p| {
            let n = counts.get(&p).map_or(0, BTreeSet::len);
            (n != 1).then(|| {
                Diagnostic::new(
                    Code::StrictParticipation,
                    vec![kb.name(p).to_string()],
                    format!("simple process `{}` has {n} PCSP participants, expected exactly one", kb.name(p)),
                )
                .with_span(kb.entity_span(p).cloned())
            })
        })
        .collect()
}
