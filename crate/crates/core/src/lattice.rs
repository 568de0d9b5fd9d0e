//! The grammar: systems partitioning types, their entry conditions and
//! choosers, and per-type realization constraints.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::{IndexMap, IndexSet};

use crate::chooser::Chooser;
use crate::constraints::{ConstraintSet, SystemIndex};
use crate::entry::Dnf;
use crate::types::{FunctionLabel, TypeId};

/// Name of the distinguished most general type.
pub const ROOT_TYPE: &str = "start";

/// A named type axiom: an entry condition and mutually exclusive outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub entry: Dnf,
    pub outputs: Vec<TypeId>,
    pub chooser_name: Option<String>,
    pub chooser: Option<Chooser>,
}

impl System {
    pub fn new(name: &str, entry: Dnf, outputs: Vec<TypeId>) -> Self {
        System {
            name: name.to_string(),
            entry,
            outputs,
            chooser_name: None,
            chooser: None,
        }
    }

    pub fn with_chooser(mut self, name: &str, chooser: Chooser) -> Self {
        self.chooser_name = Some(name.to_string());
        self.chooser = Some(chooser);
        self
    }
}

/// Whether a lattice was written by hand or produced by extraction. Extracted
/// lattices may hold single-output systems and out-of-bounds chooser paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatticeKind {
    #[default]
    Authored,
    Extracted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeLattice {
    root: TypeId,
    word_type: Option<TypeId>,
    kind: LatticeKind,
    systems: Vec<System>,
    constraints: IndexMap<TypeId, ConstraintSet>,
    functions: Vec<FunctionLabel>,
    by_name: HashMap<String, usize>,
    introduced_by: HashMap<TypeId, usize>,
}

impl TypeLattice {
    /// Builds the lattice indices. Structural problems are not rejected
    /// here; see [`validate_lattice`].
    pub fn new(
        root: TypeId,
        systems: Vec<System>,
        constraints: IndexMap<TypeId, ConstraintSet>,
        declared_functions: Vec<FunctionLabel>,
        word_type: Option<TypeId>,
        kind: LatticeKind,
    ) -> Self {
        let mut by_name = HashMap::new();
        let mut introduced_by = HashMap::new();
        for (i, s) in systems.iter().enumerate() {
            by_name.entry(s.name.clone()).or_insert(i);
            for o in &s.outputs {
                introduced_by.entry(o.clone()).or_insert(i);
            }
        }
        let mut functions: IndexSet<FunctionLabel> = declared_functions.into_iter().collect();
        for cs in constraints.values() {
            functions.extend(cs.labels().cloned());
        }
        TypeLattice {
            root,
            word_type,
            kind,
            systems,
            constraints,
            functions: functions.into_iter().collect(),
            by_name,
            introduced_by,
        }
    }

    pub fn root(&self) -> &TypeId {
        &self.root
    }

    pub fn word_type(&self) -> Option<&TypeId> {
        self.word_type.as_ref()
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn systems(&self) -> &[System] {
        &self.systems
    }

    pub fn system(&self, name: &str) -> Option<&System> {
        self.by_name.get(name).map(|&i| &self.systems[i])
    }

    pub(crate) fn system_position(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// The system whose entry is exactly the root type.
    pub fn root_system(&self) -> Option<&System> {
        self.systems
            .iter()
            .find(|s| s.entry.single_atom() == Some(&self.root))
    }

    /// The system that has `t` among its outputs.
    pub fn introducing(&self, t: &TypeId) -> Option<&System> {
        self.introduced_by.get(t).map(|&i| &self.systems[i])
    }

    pub fn constraints(&self) -> &IndexMap<TypeId, ConstraintSet> {
        &self.constraints
    }

    pub fn constraints_of(&self, t: &TypeId) -> Option<&ConstraintSet> {
        self.constraints.get(t)
    }

    /// Function labels in declaration order, followed by undeclared labels in
    /// first-mention order.
    pub fn functions(&self) -> &[FunctionLabel] {
        &self.functions
    }

    /// Rank of a function label in the declaration order; unknown labels
    /// sort last.
    pub fn function_rank(&self, label: &FunctionLabel) -> usize {
        self.functions
            .iter()
            .position(|f| f == label)
            .unwrap_or(self.functions.len())
    }

    /// The root followed by every system output, in definition order.
    pub fn types(&self) -> IndexSet<TypeId> {
        let mut out = IndexSet::new();
        out.insert(self.root.clone());
        for s in &self.systems {
            out.extend(s.outputs.iter().cloned());
        }
        out
    }

    pub fn defines(&self, t: &TypeId) -> bool {
        *t == self.root || self.introduced_by.contains_key(t)
    }

    /// Systems whose entry mentions `t`, conjunctively or not, in definition
    /// order.
    pub fn who_has_in_entry(&self, t: &TypeId) -> Vec<&System> {
        self.systems.iter().filter(|s| s.entry.contains(t)).collect()
    }

    /// Upward closure of a type set: every type together with the types its
    /// introducing system's entry necessarily implies.
    pub fn implied_closure<'a>(&self, types: impl IntoIterator<Item = &'a TypeId>) -> BTreeSet<TypeId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<TypeId> = types.into_iter().cloned().collect();
        while let Some(t) = stack.pop() {
            if !out.insert(t.clone()) {
                continue;
            }
            if let Some(s) = self.introducing(&t) {
                stack.extend(s.entry.implied_atoms());
            }
        }
        out
    }

    /// True when a filler restriction denotes a word-level constituent.
    pub fn is_lexical<'a>(&self, fillers: impl IntoIterator<Item = &'a TypeId>) -> bool {
        match &self.word_type {
            Some(w) => self.implied_closure(fillers).contains(w),
            None => false,
        }
    }
}

impl SystemIndex for TypeLattice {
    fn introducing_system(&self, t: &TypeId) -> Option<&str> {
        self.introducing(t).map(|s| s.name.as_str())
    }
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every violated lattice, system, chooser and constraint invariant.
pub fn validate_lattice(lattice: &TypeLattice) -> ValidationReport {
    let mut report = ValidationReport::default();
    let extracted = lattice.kind == LatticeKind::Extracted;
    let root = &lattice.root;

    let mut seen_names = BTreeSet::new();
    let mut owner: HashMap<&TypeId, &str> = HashMap::new();
    for s in &lattice.systems {
        let loc = format!("system {}", s.name);
        if !seen_names.insert(s.name.as_str()) {
            report.push(&loc, "duplicate system name");
        }
        let min = if extracted { 1 } else { 2 };
        if s.outputs.len() < min {
            report.push(&loc, format!("has {} outputs, needs at least {min}", s.outputs.len()));
        }
        if s.entry.is_empty() {
            report.push(&loc, "empty entry");
        }
        let mut local = BTreeSet::new();
        for o in &s.outputs {
            if !local.insert(o) {
                report.push(&loc, format!("output {o} listed twice"));
            }
            if o == root {
                report.push(&loc, format!("root type {o} used as an output"));
            }
            if s.entry.contains(o) {
                report.push(&loc, format!("type {o} is both entry atom and output"));
            }
            match owner.get(o) {
                Some(other) if *other != s.name => {
                    report.push(&loc, format!("duplicate output {o} (also output of {other})"))
                }
                _ => {
                    owner.insert(o, &s.name);
                }
            }
        }
        for a in s.entry.atoms() {
            if !lattice.defines(&a) {
                report.push(&loc, format!("unreachable atom {a} in entry"));
            }
        }
        if let Some(c) = &s.chooser {
            for t in c.chosen_types() {
                if !s.outputs.contains(&t) {
                    report.push(&loc, format!("chooser chooses {t}, which is not an output"));
                }
            }
            for v in c.violations(extracted) {
                report.push(&loc, format!("chooser: {v}"));
            }
        }
    }

    let rank_count = lattice
        .systems
        .iter()
        .filter(|s| s.entry.single_atom() == Some(root))
        .count();
    if rank_count > 1 || (rank_count == 0 && !extracted) {
        report.push(
            "lattice",
            format!("{rank_count} systems have the root {root} as entry, expected exactly one"),
        );
    }

    if let Some(cycle) = find_cycle(lattice) {
        report.push("lattice", format!("cyclic type dependencies through {cycle}"));
    }

    if let Some(w) = &lattice.word_type {
        if !lattice.defines(w) {
            report.push("lattice", format!("word type {w} is not defined"));
        }
    }

    for (t, cs) in &lattice.constraints {
        let loc = format!("constraints of {t}");
        if !lattice.defines(t) {
            report.push(&loc, "constraints attached to undefined type");
        }
        for f in cs.filler_types() {
            if !lattice.defines(f) {
                report.push(&loc, format!("filler type {f} is undefined"));
            }
        }
        for v in cs.violations(lattice) {
            report.push(&loc, v);
        }
    }
    report
}

/// Finds a type on a cycle of the "entry atom precedes output" relation.
fn find_cycle(lattice: &TypeLattice) -> Option<TypeId> {
    let mut edges: HashMap<&TypeId, Vec<&TypeId>> = HashMap::new();
    for s in &lattice.systems {
        for c in s.entry.conjuncts() {
            for a in c {
                edges.entry(a).or_default().extend(s.outputs.iter());
            }
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: HashMap<&TypeId, Mark> = HashMap::new();
    fn visit<'a>(
        t: &'a TypeId,
        edges: &HashMap<&'a TypeId, Vec<&'a TypeId>>,
        marks: &mut HashMap<&'a TypeId, Mark>,
    ) -> Option<TypeId> {
        match marks.get(t) {
            Some(Mark::Open) => return Some(t.clone()),
            Some(Mark::Done) => return None,
            None => {}
        }
        marks.insert(t, Mark::Open);
        for next in edges.get(t).into_iter().flatten() {
            if let Some(c) = visit(next, edges, marks) {
                return Some(c);
            }
        }
        marks.insert(t, Mark::Done);
        None
    }
    let mut starts: Vec<&TypeId> = edges.keys().copied().collect();
    starts.sort();
    for t in starts {
        if let Some(c) = visit(t, &edges, &mut marks) {
            return Some(c);
        }
    }
    None
}
