//! Identity reasoning for BFO processes: a typed knowledge base of entities
//! and relational facts, classification of processes, equality saturation
//! under compositional and causal identity criteria, and a validator CLI.

// Builder and parser errors are full diagnostics.
#![allow(clippy::result_large_err)]

pub mod causal;
pub mod classification;
pub mod cli;
pub mod compositional;
pub mod diagnostic;
pub mod error;
pub mod format;
pub mod mereology;
pub mod model;
pub mod pqe;
pub mod report;
pub mod state;
pub mod taxonomy;

pub use causal::{compare_criteria, history_check, realization_profile, ComparisonRow, Verdict3};
pub use classification::{
    classify, classify_aggregate, classify_sdcc, classify_simple, classify_spatial, is_in_category,
};
pub use compositional::{saturate, saturate_with, Criterion, Saturation};
pub use diagnostic::{Code, Diagnostic, Premise, Provenance, Rule, Severity, SourceSpan};
pub use error::EngineError;
pub use format::{parse, serialize};
pub use model::{EntityId, Fact, FactId, Interval, KbBuilder, KnowledgeBase, Options, Relation};
pub use pqe::expand_qualities;
pub use report::Report;
pub use state::DerivationState;
pub use taxonomy::Category;
