//! Entities, facts and the knowledge base they live in.
//!
//! A [`KbBuilder`] validates every entity and fact as it is added (domain,
//! range and functionality); [`KbBuilder::finish`] freezes the result into an
//! immutable [`KnowledgeBase`] that every engine consumes read-only.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::diagnostic::{Code, Diagnostic, SourceSpan};
use crate::taxonomy::Category;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FactId(pub u32);

impl FactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

/// Closed interval of rational instants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub start: Rational,
    pub end: Rational,
}

impl Interval {
    pub fn new(start: Rational, end: Rational) -> Option<Self> {
        (start <= end).then_some(Interval { start, end })
    }

    pub fn integers(start: i64, end: i64) -> Option<Self> {
        Self::new(Rational::from_integer(start), Rational::from_integer(end))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    pub category: Category,
    pub label: Option<String>,
    /// Only meaningful for temporal regions.
    pub extent: Option<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Inh,
    Ostr,
    Otr,
    P,
    Pc,
    Pcsp,
    Psdc,
    Pgdc,
    Real,
    Sum,
    InstanceOfAt,
    LocatedAt,
    ComesToExist,
    CeasesToExist,
    Corresponds,
    Eq,
    Neq,
}

impl Relation {
    pub const ALL: [Relation; 17] = [
        Relation::Inh,
        Relation::Ostr,
        Relation::Otr,
        Relation::P,
        Relation::Pc,
        Relation::Pcsp,
        Relation::Psdc,
        Relation::Pgdc,
        Relation::Real,
        Relation::Sum,
        Relation::InstanceOfAt,
        Relation::LocatedAt,
        Relation::ComesToExist,
        Relation::CeasesToExist,
        Relation::Corresponds,
        Relation::Eq,
        Relation::Neq,
    ];

    /// Name used in the text format.
    pub fn name(self) -> &'static str {
        use Relation::*;
        match self {
            Inh => "INH",
            Ostr => "OSTR",
            Otr => "OTR",
            P => "P",
            Pc => "PC",
            Pcsp => "PCSP",
            Psdc => "PSDC",
            Pgdc => "PGDC",
            Real => "REAL",
            Sum => "SUM",
            InstanceOfAt => "instanceOf",
            LocatedAt => "locatedAt",
            ComesToExist => "comesToExist",
            CeasesToExist => "ceasesToExist",
            Corresponds => "CORRESPONDS",
            Eq => "eq",
            Neq => "neq",
        }
    }

    /// Functional in the first argument.
    pub fn is_functional(self) -> bool {
        matches!(self, Relation::Inh | Relation::Ostr | Relation::Otr | Relation::Psdc | Relation::Pgdc)
    }

    /// Exact arity, or `None` for variadic SUM.
    pub fn arity(self) -> Option<usize> {
        use Relation::*;
        match self {
            Sum => None,
            Pc | Real | InstanceOfAt | LocatedAt => Some(3),
            _ => Some(2),
        }
    }

    pub const SUM_MIN_ARITY: usize = 3;

    /// Index of the argument holding a class name rather than an entity id.
    pub fn class_position(self) -> Option<usize> {
        (self == Relation::InstanceOfAt).then_some(1)
    }

    /// Required category of each entity argument, `None` meaning unconstrained.
    fn signature(self) -> &'static [Option<Category>] {
        use Category as C;
        use Relation::*;
        match self {
            Inh => &[Some(C::SpecificallyDependentContinuant), Some(C::IndependentContinuant)],
            Ostr => &[Some(C::Process), Some(C::SpatiotemporalRegion)],
            Otr => &[Some(C::Process), Some(C::TemporalRegion)],
            P => &[None, None],
            Pc => &[Some(C::IndependentContinuant), Some(C::Process), Some(C::TemporalRegion)],
            // Being an SDC change, GDC change or simple process is derived from
            // these very facts, so the process side is checked at `Process`.
            Pcsp => &[Some(C::IndependentContinuant), Some(C::Process)],
            Psdc => &[Some(C::Process), Some(C::SpecificallyDependentContinuant)],
            Pgdc => &[Some(C::Process), Some(C::GenericallyDependentContinuant)],
            Real => &[Some(C::RealizableEntity), Some(C::Process), Some(C::TemporalRegion)],
            Sum => &[],
            InstanceOfAt => &[None, Some(C::TemporalRegion)],
            LocatedAt => &[Some(C::IndependentContinuant), Some(C::SpatialRegion), Some(C::TemporalRegion)],
            ComesToExist | CeasesToExist => &[Some(C::Continuant), Some(C::TemporalRegion)],
            Corresponds => &[Some(C::SpecificallyDependentContinuant), Some(C::SpecificallyDependentContinuant)],
            Eq | Neq => &[None, None],
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Relation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Relation::ALL.iter().copied().find(|r| r.name() == s).ok_or(())
    }
}

/// A stored relational assertion. `args` holds entity arguments in order; for
/// `instanceOf` the class name is kept separately in `class`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fact {
    pub relation: Relation,
    pub args: Vec<EntityId>,
    pub class: Option<String>,
}

impl Fact {
    pub fn arg(&self, i: usize) -> EntityId {
        self.args[i]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Options {
    pub extended_simple: bool,
    pub parthood_realization: bool,
    pub strict_participation: bool,
    pub exclusive_determinates: bool,
}

impl Options {
    pub const FLAGS: [&'static str; 4] =
        ["extended-simple", "parthood-realization", "strict-participation", "exclusive-determinates"];

    pub fn set(&mut self, flag: &str) -> bool {
        match flag {
            "extended-simple" => self.extended_simple = true,
            "parthood-realization" => self.parthood_realization = true,
            "strict-participation" => self.strict_participation = true,
            "exclusive-determinates" => self.exclusive_determinates = true,
            _ => return false,
        }
        true
    }

    pub fn enabled(&self) -> Vec<&'static str> {
        let on =
            [self.extended_simple, self.parthood_realization, self.strict_participation, self.exclusive_determinates];
        Self::FLAGS.iter().zip(on).filter(|(_, on)| *on).map(|(f, _)| *f).collect()
    }

    pub fn union(self, other: Options) -> Options {
        Options {
            extended_simple: self.extended_simple || other.extended_simple,
            parthood_realization: self.parthood_realization || other.parthood_realization,
            strict_participation: self.strict_participation || other.strict_participation,
            exclusive_determinates: self.exclusive_determinates || other.exclusive_determinates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub determinable: Option<String>,
}

/// Immutable, validated knowledge base.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    entities: Vec<Entity>,
    entity_spans: Vec<Option<SourceSpan>>,
    index: HashMap<String, EntityId>,
    classes: BTreeMap<String, Option<String>>,
    facts: Vec<Fact>,
    fact_spans: Vec<Option<SourceSpan>>,
    by_relation: HashMap<Relation, Vec<FactId>>,
    options: Options,
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        KbBuilder::new(Options::default()).finish()
    }

    pub fn options(&self) -> Options {
        self.options
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> + '_ {
        (0..self.entities.len() as u32).map(EntityId)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.facts.is_empty()
    }

    pub fn entity(&self, id: EntityId) -> &Entity {
        &self.entities[id.index()]
    }

    pub fn name(&self, id: EntityId) -> &str {
        &self.entities[id.index()].id
    }

    pub fn lookup(&self, name: &str) -> Option<EntityId> {
        self.index.get(name).copied()
    }

    pub fn entity_span(&self, id: EntityId) -> Option<&SourceSpan> {
        self.entity_spans[id.index()].as_ref()
    }

    pub fn category(&self, id: EntityId) -> Category {
        self.entities[id.index()].category
    }

    /// Declared category equals or descends from `cat`.
    pub fn declared_is_a(&self, id: EntityId, cat: Category) -> bool {
        self.category(id).is_a(cat)
    }

    pub fn extent(&self, id: EntityId) -> Option<Interval> {
        self.entities[id.index()].extent
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassDecl> + '_ {
        self.classes.iter().map(|(n, d)| ClassDecl { name: n.clone(), determinable: d.clone() })
    }

    pub fn has_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn determinable_of(&self, class: &str) -> Option<&str> {
        self.classes.get(class).and_then(|d| d.as_deref())
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact(&self, id: FactId) -> &Fact {
        &self.facts[id.index()]
    }

    pub fn fact_span(&self, id: FactId) -> Option<&SourceSpan> {
        self.fact_spans[id.index()].as_ref()
    }

    pub fn fact_ids(&self) -> impl Iterator<Item = FactId> + '_ {
        (0..self.facts.len() as u32).map(FactId)
    }

    pub fn facts_of(&self, rel: Relation) -> impl Iterator<Item = (FactId, &Fact)> + '_ {
        self.by_relation
            .get(&rel)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&id| (id, &self.facts[id.index()]))
    }

    /// Renders a fact in the text-format syntax, e.g. `PSDC(p_heat, temperature1)`.
    pub fn render_fact(&self, fact: &Fact) -> String {
        let mut parts: Vec<&str> = fact.args.iter().map(|&a| self.name(a)).collect();
        if let (Some(pos), Some(class)) = (fact.relation.class_position(), fact.class.as_deref()) {
            parts.insert(pos, class);
        }
        format!("{}({})", fact.relation, parts.join(", "))
    }

    /// Ids of declared entities in `cat` (by declared category only).
    pub fn declared_in(&self, cat: Category) -> impl Iterator<Item = EntityId> + '_ {
        self.entity_ids().filter(move |&e| self.declared_is_a(e, cat))
    }

    /// Re-opens the KB for extension. Spans are kept.
    pub fn to_builder(&self) -> KbBuilder {
        KbBuilder {
            kb: self.clone(),
            fact_index: self.facts.iter().cloned().enumerate().map(|(i, f)| (f, FactId(i as u32))).collect(),
        }
    }

    /// A copy without the facts rejected by `keep`. Entities are untouched.
    pub fn retain_facts(&self, mut keep: impl FnMut(&KnowledgeBase, &Fact) -> bool) -> KnowledgeBase {
        let mut b = KbBuilder::new(self.options);
        b.kb.entities = self.entities.clone();
        b.kb.entity_spans = self.entity_spans.clone();
        b.kb.index = self.index.clone();
        b.kb.classes = self.classes.clone();
        for (i, f) in self.facts.iter().enumerate() {
            if keep(self, f) {
                b.push_fact(f.clone(), self.fact_spans[i].clone());
            }
        }
        b.finish()
    }

    /// Replays every entity and fact through a fresh builder. A validated KB
    /// yields no diagnostics.
    pub fn revalidate(&self) -> Vec<Diagnostic> {
        let mut b = KbBuilder::new(self.options);
        let mut diags = Vec::new();
        for (n, d) in &self.classes {
            if let Err(e) = b.declare_class(n, d.as_deref()) {
                diags.push(e);
            }
        }
        for e in &self.entities {
            if let Err(d) = b.add_entity(&e.id, e.category, e.label.as_deref()) {
                diags.push(d);
            }
            if let Some(x) = e.extent {
                if let Err(d) = b.set_extent(&e.id, x) {
                    diags.push(d);
                }
            }
        }
        for f in &self.facts {
            let args = self.fact_arg_names(f);
            if let Err(d) = b.assert_fact(f.relation, &args) {
                diags.push(d);
            }
        }
        diags
    }

    /// All argument strings of a fact, class name included, in surface order.
    pub fn fact_arg_names(&self, f: &Fact) -> Vec<String> {
        let mut args: Vec<String> = f.args.iter().map(|&a| self.name(a).to_string()).collect();
        if let (Some(pos), Some(c)) = (f.relation.class_position(), &f.class) {
            args.insert(pos, c.clone());
        }
        args
    }
}

/// Single-owner builder that validates incrementally.
#[derive(Debug, Clone)]
pub struct KbBuilder {
    kb: KnowledgeBase,
    fact_index: HashMap<Fact, FactId>,
}

impl KbBuilder {
    pub fn new(options: Options) -> Self {
        KbBuilder {
            kb: KnowledgeBase {
                entities: Vec::new(),
                entity_spans: Vec::new(),
                index: HashMap::new(),
                classes: BTreeMap::new(),
                facts: Vec::new(),
                fact_spans: Vec::new(),
                by_relation: HashMap::new(),
                options,
            },
            fact_index: HashMap::new(),
        }
    }

    pub fn options(&self) -> Options {
        self.kb.options
    }

    /// Read access to what has been accepted so far.
    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn add_entity(&mut self, id: &str, category: Category, label: Option<&str>) -> Result<EntityId, Diagnostic> {
        self.add_entity_spanned(id, category, label, None)
    }

    pub fn add_entity_spanned(
        &mut self,
        id: &str,
        category: Category,
        label: Option<&str>,
        span: Option<SourceSpan>,
    ) -> Result<EntityId, Diagnostic> {
        if self.kb.index.contains_key(id) {
            return Err(Diagnostic::new(
                Code::DuplicateId,
                vec![id.to_string()],
                format!("entity `{id}` is already declared"),
            )
            .with_span(span));
        }
        if category.requires_extended_simple() && !self.kb.options.extended_simple {
            return Err(Diagnostic::new(
                Code::UnknownCategory,
                vec![id.to_string()],
                format!("category `{category}` requires option extended-simple"),
            )
            .with_span(span));
        }
        let eid = EntityId(self.kb.entities.len() as u32);
        self.kb.entities.push(Entity { id: id.to_string(), category, label: label.map(str::to_string), extent: None });
        self.kb.entity_spans.push(span);
        self.kb.index.insert(id.to_string(), eid);
        Ok(eid)
    }

    /// Like [`add_entity`](Self::add_entity) but resolving the category name.
    pub fn add_entity_named(
        &mut self,
        id: &str,
        category: &str,
        label: Option<&str>,
        span: Option<SourceSpan>,
    ) -> Result<EntityId, Diagnostic> {
        let cat = category.parse::<Category>().map_err(|e| {
            Diagnostic::new(Code::UnknownCategory, vec![id.to_string()], e.to_string()).with_span(span.clone())
        })?;
        self.add_entity_spanned(id, cat, label, span)
    }

    /// Declares a class name. `determinable` names the determinable this class
    /// is a determinate of; it is declared implicitly when new.
    pub fn declare_class(&mut self, name: &str, determinable: Option<&str>) -> Result<(), Diagnostic> {
        self.declare_class_spanned(name, determinable, None)
    }

    pub fn declare_class_spanned(
        &mut self,
        name: &str,
        determinable: Option<&str>,
        span: Option<SourceSpan>,
    ) -> Result<(), Diagnostic> {
        match self.kb.classes.get(name) {
            Some(existing) if existing.is_some() && determinable.is_some() && existing.as_deref() != determinable => {
                return Err(Diagnostic::new(
                    Code::DuplicateId,
                    vec![name.to_string()],
                    format!("class `{name}` is already declared with a different determinable"),
                )
                .with_span(span));
            }
            Some(Some(_)) => {}
            _ => {
                self.kb.classes.insert(name.to_string(), determinable.map(str::to_string));
            }
        }
        if let Some(d) = determinable {
            self.kb.classes.entry(d.to_string()).or_insert(None);
        }
        Ok(())
    }

    pub fn set_extent(&mut self, tr: &str, interval: Interval) -> Result<(), Diagnostic> {
        self.set_extent_spanned(tr, interval, None)
    }

    pub fn set_extent_spanned(
        &mut self,
        tr: &str,
        interval: Interval,
        span: Option<SourceSpan>,
    ) -> Result<(), Diagnostic> {
        let id = self.resolve(tr, &span)?;
        let ent = &mut self.kb.entities[id.index()];
        if !ent.category.is_a(Category::TemporalRegion) {
            return Err(Diagnostic::new(
                Code::DomainViolation,
                vec![tr.to_string()],
                format!("interval given for `{tr}`, which is a {} and not a TemporalRegion", ent.category),
            )
            .with_span(span));
        }
        match ent.extent {
            Some(x) if x != interval => Err(Diagnostic::new(
                Code::FunctionalityViolation,
                vec![tr.to_string()],
                format!("`{tr}` already has extent {x}"),
            )
            .with_span(span)),
            _ => {
                ent.extent = Some(interval);
                Ok(())
            }
        }
    }

    fn resolve(&self, name: &str, span: &Option<SourceSpan>) -> Result<EntityId, Diagnostic> {
        self.kb.lookup(name).ok_or_else(|| {
            Diagnostic::new(Code::UnknownEntity, vec![name.to_string()], format!("`{name}` is not a declared entity"))
                .with_span(span.clone())
        })
    }

    pub fn assert_fact(&mut self, relation: Relation, args: &[impl AsRef<str>]) -> Result<FactId, Diagnostic> {
        self.assert_fact_spanned(relation, args, None)
    }

    /// Validates and stores a fact. Re-asserting an identical fact returns the
    /// existing id.
    pub fn assert_fact_spanned(
        &mut self,
        relation: Relation,
        args: &[impl AsRef<str>],
        span: Option<SourceSpan>,
    ) -> Result<FactId, Diagnostic> {
        let names: Vec<&str> = args.iter().map(|a| a.as_ref()).collect();
        let subjects = || names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let arity_ok = match relation.arity() {
            Some(n) => names.len() == n,
            None => names.len() >= Relation::SUM_MIN_ARITY,
        };
        if !arity_ok {
            let want = relation.arity().map_or(format!("at least {}", Relation::SUM_MIN_ARITY), |n| n.to_string());
            return Err(Diagnostic::new(
                Code::ParseError,
                subjects(),
                format!("{relation} takes {want} arguments, got {}", names.len()),
            )
            .with_span(span));
        }

        let class_pos = relation.class_position();
        let mut ids = Vec::with_capacity(names.len());
        let mut class = None;
        for (i, n) in names.iter().enumerate() {
            if Some(i) == class_pos {
                class = Some(n.to_string());
            } else {
                ids.push(self.resolve(n, &span)?);
            }
        }

        let sig = relation.signature();
        for (i, &id) in ids.iter().enumerate() {
            if let Some(Some(want)) = sig.get(i) {
                let got = self.kb.category(id);
                if !got.is_a(*want) {
                    return Err(Diagnostic::new(
                        Code::DomainViolation,
                        subjects(),
                        format!(
                            "argument {} of {relation} must be a {want}, but `{}` is a {got}",
                            i + 1,
                            self.kb.name(id)
                        ),
                    )
                    .with_span(span));
                }
            }
        }

        if matches!(relation, Relation::P | Relation::Sum) {
            let branches: Vec<_> = ids.iter().filter_map(|&id| self.kb.category(id).branch()).collect();
            if branches.windows(2).any(|w| w[0] != w[1]) {
                return Err(Diagnostic::new(
                    Code::CrossBranch,
                    subjects(),
                    format!("{relation} relates a continuant with an occurrent"),
                )
                .with_span(span));
            }
        }

        let fact = Fact { relation, args: ids, class };
        if let Some(&existing) = self.fact_index.get(&fact) {
            return Ok(existing);
        }

        if relation.is_functional() {
            let subject = fact.args[0];
            if let Some((_, other)) = self.kb.facts_of(relation).find(|(_, f)| f.args[0] == subject) {
                return Err(Diagnostic::new(
                    Code::FunctionalityViolation,
                    subjects(),
                    format!(
                        "{relation} is functional and `{}` already has value `{}`",
                        self.kb.name(subject),
                        self.kb.name(other.args[1])
                    ),
                )
                .with_span(span));
            }
        }

        Ok(self.push_fact(fact, span))
    }

    fn push_fact(&mut self, fact: Fact, span: Option<SourceSpan>) -> FactId {
        let id = FactId(self.kb.facts.len() as u32);
        self.kb.by_relation.entry(fact.relation).or_default().push(id);
        self.fact_index.insert(fact.clone(), id);
        self.kb.facts.push(fact);
        self.kb.fact_spans.push(span);
        id
    }

    pub fn finish(self) -> KnowledgeBase {
        self.kb
    }
}
