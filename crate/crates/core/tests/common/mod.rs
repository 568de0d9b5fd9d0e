#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use subgrammar::{ConstraintSet, EntryExpr, TypeId, TypeLattice};

pub type Selection = BTreeSet<TypeId>;

fn satisfied(lattice: &TypeLattice, i: usize, selected: &Selection) -> bool {
    lattice.systems()[i]
        .entry
        .conjuncts()
        .iter()
        .any(|c| c.iter().all(|t| selected.contains(t)))
}

/// Every complete selection reachable by firing satisfied systems and
/// branching over their outputs, optionally restricted to `allowed`. A system
/// with no allowed output is passed over.
pub fn maximal_selections(lattice: &TypeLattice, allowed: Option<&BTreeSet<TypeId>>) -> BTreeSet<Selection> {
    fn go(
        lattice: &TypeLattice,
        allowed: Option<&BTreeSet<TypeId>>,
        selected: Selection,
        fired: Vec<bool>,
        out: &mut BTreeSet<Selection>,
    ) {
        let next = (0..fired.len()).find(|&i| !fired[i] && satisfied(lattice, i, &selected));
        let Some(i) = next else {
            out.insert(selected);
            return;
        };
        let mut fired = fired;
        fired[i] = true;
        let outs: Vec<&TypeId> = lattice.systems()[i]
            .outputs
            .iter()
            .filter(|o| allowed.is_none_or(|a| a.contains(*o)))
            .collect();
        if outs.is_empty() {
            go(lattice, allowed, selected, fired, out);
            return;
        }
        for o in outs {
            let mut s = selected.clone();
            s.insert(o.clone());
            go(lattice, allowed, s, fired.clone(), out);
        }
    }
    let mut out = BTreeSet::new();
    let mut start = Selection::new();
    start.insert(lattice.root().clone());
    go(lattice, allowed, start, vec![false; lattice.systems().len()], &mut out);
    out
}

/// Types a subgrammar must keep, computed from the restricted selection
/// family alone: the outputs of systems that still branch, or that fire at
/// all and have a complex entry or are the root system.
pub fn expected_sub_types(full: &TypeLattice, family: &BTreeSet<Selection>) -> BTreeSet<TypeId> {
    let mut used: BTreeMap<usize, BTreeSet<TypeId>> = BTreeMap::new();
    for sel in family {
        for (i, s) in full.systems().iter().enumerate() {
            for o in &s.outputs {
                if sel.contains(o) {
                    used.entry(i).or_default().insert(o.clone());
                }
            }
        }
    }
    let mut keep = BTreeSet::new();
    keep.insert(full.root().clone());
    for (i, outs) in used {
        let s = &full.systems()[i];
        let complex = s.entry.atom_count() > 1;
        let root_system = s.entry.single_atom() == Some(full.root());
        if outs.len() >= 2 || complex || root_system {
            keep.extend(outs);
        }
    }
    keep
}

pub fn atom_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{i}")).collect()
}

/// Entry expressions over at most `atoms` distinct atoms.
pub fn entry_strategy(atoms: usize) -> impl Strategy<Value = EntryExpr> {
    let leaf = (0..atoms).prop_map(|i| EntryExpr::atom(&format!("t{i}")));
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(EntryExpr::And),
            prop::collection::vec(inner, 1..4).prop_map(EntryExpr::Or),
        ]
    })
}

/// Truth-table equality of two expressions over the given atoms.
pub fn same_truth_table(a: &EntryExpr, b: &EntryExpr, atoms: &[TypeId]) -> bool {
    assert!(atoms.len() <= 16);
    (0u32..(1 << atoms.len())).all(|mask| {
        let truth = |t: &TypeId| atoms.iter().position(|x| x == t).is_some_and(|i| mask & (1 << i) != 0);
        a.eval(&truth) == b.eval(&truth)
    })
}

/// Every subset of `universe`, as selections.
pub fn subsets(universe: &[TypeId]) -> Vec<Selection> {
    (0u32..(1 << universe.len()))
        .map(|mask| {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| t.clone())
                .collect()
        })
        .collect()
}

/// A small sibling structure for constraint tests: three systems with
/// outputs a0..a2, b0..b1, c0..c2.
pub fn sibling_index() -> std::collections::HashMap<TypeId, String> {
    let mut m = std::collections::HashMap::new();
    for (sys, outs) in [("sa", &["a0", "a1", "a2"][..]), ("sb", &["b0", "b1"][..]), ("sc", &["c0", "c1", "c2"][..])] {
        for o in outs {
            m.insert(TypeId::new(o), sys.to_string());
        }
    }
    m
}

const LABELS: [&str; 4] = ["F", "G", "H", "K"];
const FILLERS: [&str; 8] = ["a0", "a1", "a2", "b0", "b1", "c0", "c1", "c2"];
const ITEMS: [&str; 3] = ["x", "y", "z"];

/// Constraint sets over a few labels and the sibling types above. Fillers
/// are drawn so that conflicts happen but are not the rule.
pub fn constraint_strategy() -> impl Strategy<Value = ConstraintSet> {
    let insertion = (0..LABELS.len(), prop::collection::vec(0..FILLERS.len(), 0..2));
    let pair = (0..LABELS.len(), 0..LABELS.len());
    (
        prop::collection::vec(insertion, 0..3),
        prop::collection::vec(pair.clone(), 0..2),
        prop::collection::vec(pair, 0..2),
        prop::collection::vec((0..LABELS.len(), 0..ITEMS.len()), 0..2),
    )
        .prop_map(|(ins, conf, ord, lex)| {
            let mut cs = ConstraintSet::new();
            for (l, fs) in ins {
                cs = cs.insert(LABELS[l], fs.into_iter().map(|f| FILLERS[f]));
            }
            for (a, b) in conf {
                cs = cs.conflate(LABELS[a], LABELS[b]);
            }
            for (a, b) in ord {
                cs = cs.order(LABELS[a], LABELS[b]);
            }
            for (l, i) in lex {
                cs = cs.lexify(LABELS[l], ITEMS[i]);
            }
            cs
        })
}

/// Drops sets that already violate sibling disjointness on their own.
pub fn well_formed(cs: &ConstraintSet) -> bool {
    cs.violations(&sibling_index()).is_empty()
}
