//! Realization constraints attached to types, and their unification.

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use crate::types::{FunctionLabel, LexId, TypeId};

/// Conjunctive filler restriction of a function. Empty means unconstrained.
pub type FillerSpec = IndexSet<TypeId>;

/// Lexical selection for a function: a lexicon entry or a literal spelling.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LexSelection {
    Item(LexId),
    Literal { literal: String },
}

impl std::fmt::Display for LexSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LexSelection::Item(id) => write!(f, "{id}"),
            LexSelection::Literal { literal } => write!(f, "\"{literal}\""),
        }
    }
}

/// Feature insertions, conflations, orderings and lexical selections.
///
/// Equality is set equality: two constraint sets built in different orders
/// compare equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet {
    #[serde(rename = "insert", default, skip_serializing_if = "IndexMap::is_empty")]
    pub insertions: IndexMap<FunctionLabel, FillerSpec>,
    #[serde(
        rename = "conflate",
        default,
        skip_serializing_if = "IndexSet::is_empty",
        deserialize_with = "normalized_pairs"
    )]
    pub conflations: IndexSet<(FunctionLabel, FunctionLabel)>,
    #[serde(rename = "order", default, skip_serializing_if = "IndexSet::is_empty")]
    pub orderings: IndexSet<(FunctionLabel, FunctionLabel)>,
    #[serde(rename = "lexify", default, skip_serializing_if = "IndexMap::is_empty")]
    pub lexifications: IndexMap<FunctionLabel, LexSelection>,
}

/// Maps a type to the system that introduces it; used for the sibling
/// disjointness test.
pub trait SystemIndex {
    fn introducing_system(&self, t: &TypeId) -> Option<&str>;
}

impl SystemIndex for std::collections::HashMap<TypeId, String> {
    fn introducing_system(&self, t: &TypeId) -> Option<&str> {
        self.get(t).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnificationFailure {
    #[error("function {label}: filler types {first} and {second} are disjoint outputs of system {system}")]
    SiblingConflict {
        label: FunctionLabel,
        first: TypeId,
        second: TypeId,
        system: String,
    },
    #[error("function {label}: conflicting lexical selections {first} and {second}")]
    LexicalConflict {
        label: FunctionLabel,
        first: LexSelection,
        second: LexSelection,
    },
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.insertions.is_empty()
            && self.conflations.is_empty()
            && self.orderings.is_empty()
            && self.lexifications.is_empty()
    }

    /// Inserts `label`, adding `fillers` to its filler restriction.
    pub fn insert<'a>(
        mut self,
        label: &str,
        fillers: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let spec = self.insertions.entry(FunctionLabel::from(label)).or_default();
        spec.extend(fillers.into_iter().map(TypeId::new));
        self
    }

    pub fn conflate(mut self, a: &str, b: &str) -> Self {
        self.touch(a);
        self.touch(b);
        self.conflations.insert(conflation_pair(a.into(), b.into()));
        self
    }

    pub fn order(mut self, before: &str, after: &str) -> Self {
        self.touch(before);
        self.touch(after);
        self.orderings.insert((before.into(), after.into()));
        self
    }

    pub fn lexify(mut self, label: &str, item: &str) -> Self {
        self.touch(label);
        self.lexifications
            .insert(label.into(), LexSelection::Item(LexId::from(item)));
        self
    }

    pub fn lexify_literal(mut self, label: &str, spelling: &str) -> Self {
        self.touch(label);
        self.lexifications.insert(
            label.into(),
            LexSelection::Literal { literal: spelling.to_string() },
        );
        self
    }

    fn touch(&mut self, label: &str) {
        self.insertions.entry(label.into()).or_default();
    }

    /// Function labels in first-mention order.
    pub fn labels(&self) -> impl Iterator<Item = &FunctionLabel> {
        self.insertions.keys()
    }

    /// Every type mentioned in a filler restriction.
    pub fn filler_types(&self) -> impl Iterator<Item = &TypeId> {
        self.insertions.values().flatten()
    }

    /// Invariant violations: labels used but not inserted, sibling fillers.
    pub fn violations(&self, index: &dyn SystemIndex) -> Vec<String> {
        let mut out = Vec::new();
        let mentioned = self
            .conflations
            .iter()
            .chain(self.orderings.iter())
            .flat_map(|(a, b)| [a, b])
            .chain(self.lexifications.keys());
        for label in mentioned {
            if !self.insertions.contains_key(label) {
                out.push(format!("function {label} is used but not inserted"));
            }
        }
        for (label, spec) in &self.insertions {
            if let Some(conflict) = sibling_conflict(label, spec, index) {
                out.push(conflict.to_string());
            }
        }
        out
    }
}

fn normalized_pairs<'de, D>(d: D) -> Result<IndexSet<(FunctionLabel, FunctionLabel)>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw = Vec::<(FunctionLabel, FunctionLabel)>::deserialize(d)?;
    Ok(raw.into_iter().map(|(a, b)| conflation_pair(a, b)).collect())
}

pub(crate) fn conflation_pair(a: FunctionLabel, b: FunctionLabel) -> (FunctionLabel, FunctionLabel) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn sibling_conflict(
    label: &FunctionLabel,
    spec: &FillerSpec,
    index: &dyn SystemIndex,
) -> Option<UnificationFailure> {
    let types: Vec<&TypeId> = spec.iter().collect();
    for (i, first) in types.iter().enumerate() {
        let Some(sys) = index.introducing_system(first) else { continue };
        for second in &types[i + 1..] {
            if index.introducing_system(second) == Some(sys) {
                return Some(UnificationFailure::SiblingConflict {
                    label: label.clone(),
                    first: (*first).clone(),
                    second: (*second).clone(),
                    system: sys.to_string(),
                });
            }
        }
    }
    None
}

/// Unifies two constraint sets: filler restrictions are merged per function,
/// the other components are set-unioned. Fails when a merged filler
/// restriction holds two outputs of one system, or a function receives two
/// distinct lexical selections.
pub fn unify_constraints(
    a: &ConstraintSet,
    b: &ConstraintSet,
    index: &dyn SystemIndex,
) -> Result<ConstraintSet, UnificationFailure> {
    let mut out = a.clone();
    for (label, spec) in &b.insertions {
        let merged = out.insertions.entry(label.clone()).or_default();
        merged.extend(spec.iter().cloned());
    }
    for (label, spec) in &out.insertions {
        if let Some(err) = sibling_conflict(label, spec, index) {
            return Err(err);
        }
    }
    out.conflations.extend(b.conflations.iter().cloned());
    out.orderings.extend(b.orderings.iter().cloned());
    for (label, sel) in &b.lexifications {
        match out.lexifications.get(label) {
            Some(existing) if existing != sel => {
                return Err(UnificationFailure::LexicalConflict {
                    label: label.clone(),
                    first: existing.clone(),
                    second: sel.clone(),
                });
            }
            Some(_) => {}
            None => {
                out.lexifications.insert(label.clone(), sel.clone());
            }
        }
    }
    Ok(out)
}
