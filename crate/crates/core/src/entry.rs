//! Entry conditions of systems: boolean expressions over types and their
//! disjunctive normal form.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::types::TypeId;

/// Boolean expression over type identifiers gating a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntryExpr {
    Atom(TypeId),
    And(Vec<EntryExpr>),
    Or(Vec<EntryExpr>),
}

impl EntryExpr {
    pub fn atom(name: &str) -> Self {
        EntryExpr::Atom(TypeId::new(name))
    }

    pub fn and(children: Vec<EntryExpr>) -> Self {
        EntryExpr::And(children)
    }

    pub fn or(children: Vec<EntryExpr>) -> Self {
        EntryExpr::Or(children)
    }

    /// `and`/`or` nodes must have at least one child, recursively.
    pub fn is_well_formed(&self) -> bool {
        match self {
            EntryExpr::Atom(_) => true,
            EntryExpr::And(c) | EntryExpr::Or(c) => {
                !c.is_empty() && c.iter().all(EntryExpr::is_well_formed)
            }
        }
    }

    /// Evaluates the expression under a truth assignment to atoms.
    pub fn eval(&self, truth: &dyn Fn(&TypeId) -> bool) -> bool {
        match self {
            EntryExpr::Atom(t) => truth(t),
            EntryExpr::And(c) => c.iter().all(|e| e.eval(truth)),
            EntryExpr::Or(c) => c.iter().any(|e| e.eval(truth)),
        }
    }

    /// Distinct atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<TypeId> {
        fn walk(e: &EntryExpr, out: &mut Vec<TypeId>) {
            match e {
                EntryExpr::Atom(t) => {
                    if !out.contains(t) {
                        out.push(t.clone());
                    }
                }
                EntryExpr::And(c) | EntryExpr::Or(c) => c.iter().for_each(|e| walk(e, out)),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for EntryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryExpr::Atom(t) => write!(f, "{t}"),
            EntryExpr::And(c) | EntryExpr::Or(c) => {
                let op = if matches!(self, EntryExpr::And(_)) { "AND" } else { "OR" };
                write!(f, "({op}")?;
                for e in c {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// An entry in disjunctive normal form: a disjunction of conjunctions of
/// atoms. The empty disjunction is unsatisfiable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dnf {
    conjuncts: Vec<Vec<TypeId>>,
}

impl Dnf {
    /// The empty disjunction (never satisfied).
    pub fn empty() -> Self {
        Dnf::default()
    }

    pub fn atom(t: TypeId) -> Self {
        Dnf { conjuncts: vec![vec![t]] }
    }

    /// Builds a DNF from raw conjuncts, deduplicating and applying absorption.
    pub fn from_conjuncts(conjuncts: Vec<Vec<TypeId>>) -> Self {
        Dnf { conjuncts: canonicalize(conjuncts) }
    }

    pub fn from_expr(expr: &EntryExpr) -> Self {
        Dnf::from_conjuncts(expand(expr))
    }

    pub fn conjuncts(&self) -> &[Vec<TypeId>] {
        &self.conjuncts
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Distinct atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<TypeId> {
        let mut out: Vec<TypeId> = Vec::new();
        for t in self.conjuncts.iter().flatten() {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
        out
    }

    pub fn atom_count(&self) -> usize {
        self.atoms().len()
    }

    pub fn contains(&self, t: &TypeId) -> bool {
        self.conjuncts.iter().flatten().any(|a| a == t)
    }

    /// The single atom of a one-atom entry.
    pub fn single_atom(&self) -> Option<&TypeId> {
        match self.conjuncts.as_slice() {
            [c] if c.len() == 1 => Some(&c[0]),
            _ => None,
        }
    }

    /// Atoms shared by every conjunct: the types implied by this entry
    /// being satisfied.
    pub fn implied_atoms(&self) -> Vec<TypeId> {
        let Some((first, rest)) = self.conjuncts.split_first() else {
            return Vec::new();
        };
        first
            .iter()
            .filter(|t| rest.iter().all(|c| c.contains(t)))
            .cloned()
            .collect()
    }

    pub fn to_expr(&self) -> EntryExpr {
        EntryExpr::Or(
            self.conjuncts
                .iter()
                .map(|c| EntryExpr::And(c.iter().cloned().map(EntryExpr::Atom).collect()))
                .collect(),
        )
    }

    /// Compact expression: bare atom, single `and`, or `or` of atoms/`and`s.
    pub fn to_compact_expr(&self) -> Option<EntryExpr> {
        let conj = |c: &Vec<TypeId>| {
            if c.len() == 1 {
                EntryExpr::Atom(c[0].clone())
            } else {
                EntryExpr::And(c.iter().cloned().map(EntryExpr::Atom).collect())
            }
        };
        match self.conjuncts.as_slice() {
            [] => None,
            [c] => Some(conj(c)),
            cs => Some(EntryExpr::Or(cs.iter().map(conj).collect())),
        }
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_compact_expr() {
            Some(e) => write!(f, "{e}"),
            None => f.write_str("(OR)"),
        }
    }
}

fn expand(expr: &EntryExpr) -> Vec<Vec<TypeId>> {
    match expr {
        EntryExpr::Atom(t) => vec![vec![t.clone()]],
        EntryExpr::Or(children) => children.iter().flat_map(expand).collect(),
        EntryExpr::And(children) => {
            let mut acc: Vec<Vec<TypeId>> = vec![Vec::new()];
            for child in children {
                let dnf = expand(child);
                let mut next = Vec::with_capacity(acc.len() * dnf.len());
                for left in &acc {
                    for right in &dnf {
                        let mut c = left.clone();
                        c.extend(right.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

fn canonicalize(conjuncts: Vec<Vec<TypeId>>) -> Vec<Vec<TypeId>> {
    let deduped: Vec<Vec<TypeId>> = conjuncts
        .into_iter()
        .map(|c| {
            let mut seen = BTreeSet::new();
            c.into_iter().filter(|t| seen.insert(t.clone())).collect()
        })
        .collect();
    let sets: Vec<BTreeSet<&TypeId>> = deduped.iter().map(|c| c.iter().collect()).collect();
    let mut keep = Vec::new();
    for (i, c) in deduped.iter().enumerate() {
        // absorbed by a strictly smaller conjunct, or a duplicate of an earlier one
        let absorbed = sets.iter().enumerate().any(|(j, other)| {
            j != i && other.is_subset(&sets[i]) && (other.len() < sets[i].len() || j < i)
        });
        if !absorbed {
            keep.push(c.clone());
        }
    }
    keep
}

/// Rewrites an entry expression into canonical DNF: an `or` of `and`s of
/// atoms, deduplicated, with absorbed conjuncts dropped, in first-occurrence
/// order.
pub fn normalize_entry(expr: &EntryExpr) -> EntryExpr {
    Dnf::from_expr(expr).to_expr()
}

/// Deletes every conjunct mentioning a type outside `goal`. The result may be
/// the empty disjunction.
pub fn remove_unsatisfiable<G>(entry: &Dnf, goal: &G) -> Dnf
where
    G: TypeSet + ?Sized,
{
    Dnf {
        conjuncts: entry
            .conjuncts
            .iter()
            .filter(|c| c.iter().all(|t| goal.has(t)))
            .cloned()
            .collect(),
    }
}

/// True iff some conjunct is contained in `selected`.
pub fn entry_satisfied<S>(entry: &Dnf, selected: &S) -> bool
where
    S: TypeSet + ?Sized,
{
    entry.conjuncts.iter().any(|c| c.iter().all(|t| selected.has(t)))
}

/// Replaces every occurrence of `t` by `supertype` and re-normalizes.
pub fn dnf_substitute(supertype: &TypeId, t: &TypeId, entry: &Dnf) -> Dnf {
    if supertype == t || !entry.contains(t) {
        return entry.clone();
    }
    Dnf::from_conjuncts(
        entry
            .conjuncts
            .iter()
            .map(|c| {
                c.iter()
                    .map(|a| if a == t { supertype.clone() } else { a.clone() })
                    .collect()
            })
            .collect(),
    )
}

/// Membership test used by the entry operations, so callers can pass any
/// set representation.
pub trait TypeSet {
    fn has(&self, t: &TypeId) -> bool;
}

impl TypeSet for BTreeSet<TypeId> {
    fn has(&self, t: &TypeId) -> bool {
        self.contains(t)
    }
}

impl TypeSet for std::collections::HashSet<TypeId> {
    fn has(&self, t: &TypeId) -> bool {
        self.contains(t)
    }
}

impl TypeSet for indexmap::IndexSet<TypeId> {
    fn has(&self, t: &TypeId) -> bool {
        self.contains(t)
    }
}

impl TypeSet for [TypeId] {
    fn has(&self, t: &TypeId) -> bool {
        self.contains(t)
    }
}

impl TypeSet for Vec<TypeId> {
    fn has(&self, t: &TypeId) -> bool {
        self.contains(t)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Atom(String),
    And { and: Vec<RawEntry> },
    Or { or: Vec<RawEntry> },
}

impl From<&EntryExpr> for RawEntry {
    fn from(e: &EntryExpr) -> Self {
        match e {
            EntryExpr::Atom(t) => RawEntry::Atom(t.as_str().to_string()),
            EntryExpr::And(c) => RawEntry::And { and: c.iter().map(RawEntry::from).collect() },
            EntryExpr::Or(c) => RawEntry::Or { or: c.iter().map(RawEntry::from).collect() },
        }
    }
}

impl From<RawEntry> for EntryExpr {
    fn from(r: RawEntry) -> Self {
        match r {
            RawEntry::Atom(s) => EntryExpr::Atom(TypeId::new(&s)),
            RawEntry::And { and } => EntryExpr::And(and.into_iter().map(Into::into).collect()),
            RawEntry::Or { or } => EntryExpr::Or(or.into_iter().map(Into::into).collect()),
        }
    }
}

impl Serialize for EntryExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawEntry::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for EntryExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let expr: EntryExpr = RawEntry::deserialize(d)?.into();
        if !expr.is_well_formed() {
            return Err(serde::de::Error::custom("empty `and`/`or` in entry expression"));
        }
        Ok(expr)
    }
}
