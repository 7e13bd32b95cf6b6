//! The fixed category tree.
//!
//! Every entity carries exactly one declared category; membership in every
//! ancestor is implied. `SdcChange` and `SpatialChange` are siblings under
//! `SimpleProcess` and are deliberately not disjoint.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Entity,
    Continuant,
    IndependentContinuant,
    MaterialEntity,
    SpatialRegion,
    SpecificallyDependentContinuant,
    Quality,
    RealizableEntity,
    Disposition,
    GenericallyDependentContinuant,
    Occurrent,
    Process,
    SimpleProcess,
    SdcChange,
    SpatialChange,
    GdcChange,
    ProcessAggregate,
    History,
    SpatiotemporalRegion,
    TemporalRegion,
}

impl Category {
    pub const ALL: [Category; 20] = [
        Category::Entity,
        Category::Continuant,
        Category::IndependentContinuant,
        Category::MaterialEntity,
        Category::SpatialRegion,
        Category::SpecificallyDependentContinuant,
        Category::Quality,
        Category::RealizableEntity,
        Category::Disposition,
        Category::GenericallyDependentContinuant,
        Category::Occurrent,
        Category::Process,
        Category::SimpleProcess,
        Category::SdcChange,
        Category::SpatialChange,
        Category::GdcChange,
        Category::ProcessAggregate,
        Category::History,
        Category::SpatiotemporalRegion,
        Category::TemporalRegion,
    ];

    pub fn parent(self) -> Option<Category> {
        use Category::*;
        Some(match self {
            Entity => return None,
            Continuant | Occurrent => Entity,
            IndependentContinuant | SpecificallyDependentContinuant | GenericallyDependentContinuant => Continuant,
            MaterialEntity | SpatialRegion => IndependentContinuant,
            Quality | RealizableEntity => SpecificallyDependentContinuant,
            Disposition => RealizableEntity,
            Process | SpatiotemporalRegion | TemporalRegion => Occurrent,
            SimpleProcess | ProcessAggregate | History => Process,
            SdcChange | SpatialChange | GdcChange => SimpleProcess,
        })
    }

    /// `self` equals `other` or descends from it.
    pub fn is_a(self, other: Category) -> bool {
        let mut cur = Some(self);
        while let Some(c) = cur {
            if c == other {
                return true;
            }
            cur = c.parent();
        }
        false
    }

    pub fn ancestors(self) -> impl Iterator<Item = Category> {
        std::iter::successors(Some(self), |c| c.parent())
    }

    /// Top-level branch below the root, if any.
    pub fn branch(self) -> Option<Category> {
        if self.is_a(Category::Continuant) {
            Some(Category::Continuant)
        } else if self.is_a(Category::Occurrent) {
            Some(Category::Occurrent)
        } else {
            None
        }
    }

    /// Categories that only exist when the simple-process definition is
    /// widened to GDC changes.
    pub fn requires_extended_simple(self) -> bool {
        self == Category::GdcChange
    }

    pub fn name(self) -> &'static str {
        use Category::*;
        match self {
            Entity => "Entity",
            Continuant => "Continuant",
            IndependentContinuant => "IndependentContinuant",
            MaterialEntity => "MaterialEntity",
            SpatialRegion => "SpatialRegion",
            SpecificallyDependentContinuant => "SpecificallyDependentContinuant",
            Quality => "Quality",
            RealizableEntity => "RealizableEntity",
            Disposition => "Disposition",
            GenericallyDependentContinuant => "GenericallyDependentContinuant",
            Occurrent => "Occurrent",
            Process => "Process",
            SimpleProcess => "SimpleProcess",
            SdcChange => "SDCChange",
            SpatialChange => "SpatialChange",
            GdcChange => "GDCChange",
            ProcessAggregate => "ProcessAggregate",
            History => "History",
            SpatiotemporalRegion => "SpatiotemporalRegion",
            TemporalRegion => "TemporalRegion",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL.iter().copied().find(|c| c.name() == s).ok_or_else(|| UnknownCategory(s.to_string()))
    }
}
