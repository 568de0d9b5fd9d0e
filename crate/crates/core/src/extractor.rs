//! Subgrammar extraction from goal types, sublexicon extraction, and
//! consistency checking of a subgrammar against its source.
//!
//! Extraction walks the lattice depth-first from the root. A system that
//! keeps a single output under the goal types and has a single-atom entry
//! collapses: its output becomes a pseudotype, the pseudotype's constraints
//! travel down the path and are finally unified into the most general
//! surviving type at the start of the path, and the collapsed chooser's
//! actions are handed to the next surviving chooser.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use indexmap::{IndexMap, IndexSet};
use serde::Serialize;

use crate::chooser::{
    append_after_choice, extend_chooser, mark_out_of_bounds, prune_chooser_by_responses, Chooser,
    ChooserAction, ObservedResponses,
};
use crate::constraints::{unify_constraints, ConstraintSet, UnificationFailure};
use crate::entry::{dnf_substitute, remove_unsatisfiable, Dnf, TypeSet};
use crate::exec::{map_indexed, Execution};
use crate::generator::generate_sentence;
use crate::lattice::{LatticeKind, System, TypeLattice};
use crate::lexicon::Lexicon;
use crate::semantics::SemanticSpec;
use crate::types::TypeId;

/// The cumulative set of types used during training.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GoalTypeSet {
    pub types: BTreeSet<TypeId>,
    /// Where the set came from, e.g. a corpus file name.
    pub source: Option<String>,
    pub sentences: usize,
}

impl GoalTypeSet {
    pub fn new(types: impl IntoIterator<Item = TypeId>) -> Self {
        GoalTypeSet {
            types: types.into_iter().collect(),
            source: None,
            sentences: 0,
        }
    }

    /// Every type of `lattice`; extraction with this goal is the identity.
    pub fn all_of(lattice: &TypeLattice) -> Self {
        Self::new(lattice.types())
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn contains(&self, t: &TypeId) -> bool {
        self.types.contains(t)
    }

    pub fn validate(&self, lattice: &TypeLattice) -> Result<(), ExtractError> {
        if !self.types.contains(lattice.root()) {
            return Err(ExtractError::MissingRoot(lattice.root().clone()));
        }
        match self.types.iter().find(|t| !lattice.defines(t)) {
            Some(t) => Err(ExtractError::UndefinedGoalType(t.clone())),
            None => Ok(()),
        }
    }
}

impl TypeSet for GoalTypeSet {
    fn has(&self, t: &TypeId) -> bool {
        self.types.contains(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("goal type {0} is not defined in the grammar")]
    UndefinedGoalType(TypeId),
    #[error("goal types do not include the root type {0}")]
    MissingRoot(TypeId),
    #[error("raising constraints along {path}: {source}")]
    Unification { path: String, source: UnificationFailure },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ExtractionReport {
    pub goal_types: usize,
    pub kept_types: usize,
    pub kept_systems: usize,
    /// Pseudotypes, in the order they were found.
    pub excised_types: Vec<TypeId>,
    /// (pseudotype, type its constraints were raised to)
    pub raised_constraints: Vec<(TypeId, TypeId)>,
    /// (collapsed system, system whose chooser received its actions)
    pub percolated_actions: Vec<(String, String)>,
    pub unreachable_systems: Vec<String>,
    pub warnings: Vec<String>,
}

impl ExtractionReport {
    /// Aligned plain-text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "goal types       {:>4}", self.goal_types);
        let _ = writeln!(out, "kept types       {:>4}", self.kept_types);
        let _ = writeln!(out, "kept systems     {:>4}", self.kept_systems);
        let _ = writeln!(out, "excised types    {:>4}", self.excised_types.len());
        for (from, to) in &self.raised_constraints {
            let _ = writeln!(out, "  raised   {from:<24} -> {to}");
        }
        for (from, to) in &self.percolated_actions {
            let _ = writeln!(out, "  actions  {from:<24} -> {to}");
        }
        for s in &self.unreachable_systems {
            let _ = writeln!(out, "  dropped  {s}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExtractOptions {
    /// Prune choosers by the inquiry responses observed in training instead
    /// of only marking excised choices out of bounds.
    pub responses: Option<ObservedResponses>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Untouched,
    Collapsed,
    Retained,
    Dead,
}

type Pending = Vec<(String, ChooserAction)>;

struct Extraction<'a> {
    full: &'a TypeLattice,
    goal: &'a GoalTypeSet,
    entries: Vec<Dnf>,
    outputs: Vec<Vec<TypeId>>,
    choosers: Vec<Option<Chooser>>,
    state: Vec<State>,
    constraints: IndexMap<TypeId, ConstraintSet>,
    pseudo: IndexMap<TypeId, TypeId>,
    report: ExtractionReport,
}

impl Extraction<'_> {
    fn traverse_type(
        &mut self,
        t: &TypeId,
        supertype: &TypeId,
        inherited: &ConstraintSet,
        pending: &mut Pending,
        chain: &mut Vec<TypeId>,
    ) -> Result<(), ExtractError> {
        let who: Vec<usize> = (0..self.entries.len())
            .filter(|&i| self.entries[i].contains(t))
            .collect();
        let mut consumed = false;
        for i in who {
            consumed |= self.traverse_system(i, t, supertype, inherited, pending, chain)?;
        }
        if !consumed {
            self.raise_constraints(supertype, inherited, chain)?;
            if !pending.is_empty() {
                let actions = std::mem::take(pending);
                self.raise_actions(supertype, actions);
            }
        }
        Ok(())
    }

    /// Returns whether the system took over the path's inherited constraints
    /// and pending actions.
    fn traverse_system(
        &mut self,
        i: usize,
        t: &TypeId,
        supertype: &TypeId,
        inherited: &ConstraintSet,
        pending: &mut Pending,
        chain: &mut Vec<TypeId>,
    ) -> Result<bool, ExtractError> {
        match self.state[i] {
            State::Retained => {
                // reached again through another atom of a complex entry
                self.entries[i] = dnf_substitute(supertype, t, &self.entries[i]);
                self.deliver(i, supertype, pending);
                self.raise_constraints(supertype, inherited, chain)?;
                return Ok(true);
            }
            State::Collapsed | State::Dead => return Ok(false),
            State::Untouched => {}
        }
        let original = &self.full.systems()[i];
        let inter: Vec<TypeId> = original
            .outputs
            .iter()
            .filter(|o| self.goal.contains(o))
            .cloned()
            .collect();
        if inter.is_empty() {
            self.state[i] = State::Dead;
            return Ok(false);
        }
        // the root system stays so the lattice keeps exactly one entry point
        let is_root = original.entry.single_atom() == Some(self.full.root());
        let complex = original.entry.atom_count() > 1 || original.outputs.len() < 2 || is_root;

        if !complex && inter.len() == 1 {
            self.state[i] = State::Collapsed;
            let out = inter[0].clone();
            let own = self.constraints.get(&out).cloned().unwrap_or_default();
            let cs = unify_constraints(&own, inherited, self.full).map_err(|source| {
                ExtractError::Unification { path: path_text(supertype, chain, &out), source }
            })?;
            self.pseudo.insert(out.clone(), supertype.clone());
            self.report.excised_types.push(out.clone());
            let actions = self.percolated_material(original, &out);
            pending.extend(actions.into_iter().map(|a| (original.name.clone(), a)));
            chain.push(out.clone());
            self.traverse_type(&out, supertype, &cs, pending, chain)?;
            chain.pop();
            return Ok(true);
        }

        self.state[i] = State::Retained;
        self.entries[i] = dnf_substitute(supertype, t, &self.entries[i]);
        self.outputs[i] = inter.clone();
        self.deliver(i, supertype, pending);
        for o in &inter {
            self.traverse_type(o, o, &ConstraintSet::new(), &mut Vec::new(), &mut Vec::new())?;
        }
        self.raise_constraints(supertype, inherited, chain)?;
        Ok(true)
    }

    /// Non-choose actions on the chooser paths that select `out`.
    fn percolated_material(&mut self, system: &System, out: &TypeId) -> Vec<ChooserAction> {
        let Some(chooser) = &system.chooser else { return Vec::new() };
        let paths: Vec<_> = chooser
            .paths()
            .into_iter()
            .filter(|p| p.chosen() == Some(out))
            .collect();
        let strip = |actions: &[ChooserAction]| -> Vec<ChooserAction> {
            actions
                .iter()
                .filter(|a| !matches!(a, ChooserAction::Choose(_)))
                .cloned()
                .collect()
        };
        let Some(first) = paths.first() else {
            self.report
                .warnings
                .push(format!("chooser of {} never chooses {out}", system.name));
            return Vec::new();
        };
        let actions = strip(&first.actions);
        if paths.iter().any(|p| strip(&p.actions) != actions) {
            self.report.warnings.push(format!(
                "paths choosing {out} in {} perform different actions; the first path's actions were percolated",
                system.name
            ));
        }
        let asked: BTreeSet<&str> = paths
            .iter()
            .flat_map(|p| p.asks.iter().map(|(q, _)| q.name.as_str()))
            .collect();
        if !asked.is_empty() {
            let names: Vec<&str> = asked.into_iter().collect();
            self.report.warnings.push(format!(
                "inquiries {} of {} elided when collapsing to {out}",
                names.join(", "),
                system.name
            ));
        }
        actions
    }

    /// Attaches pending actions to system `i` when it fires whenever
    /// `supertype` is selected; raises them otherwise.
    fn deliver(&mut self, i: usize, supertype: &TypeId, pending: &mut Pending) {
        if pending.is_empty() {
            return;
        }
        let fires_on_supertype = self.entries[i]
            .conjuncts()
            .iter()
            .any(|c| c.len() == 1 && c[0] == *supertype);
        let actions = std::mem::take(pending);
        match (&self.choosers[i], fires_on_supertype) {
            (Some(c), true) => {
                let plain: Vec<ChooserAction> = actions.iter().map(|(_, a)| a.clone()).collect();
                self.choosers[i] = Some(extend_chooser(c, &plain).expect("choose actions are never pending"));
                let to = self.full.systems()[i].name.clone();
                self.note_percolation(&actions, &to);
            }
            _ => self.raise_actions(supertype, actions),
        }
    }

    /// Runs the actions whenever `supertype` is chosen: prepended to the
    /// root system's chooser for the root, else inserted after the choice
    /// of `supertype` in its introducing system's chooser.
    fn raise_actions(&mut self, supertype: &TypeId, actions: Pending) {
        let plain: Vec<ChooserAction> = actions.iter().map(|(_, a)| a.clone()).collect();
        let target = if supertype == self.full.root() {
            self.full.root_system()
        } else {
            self.full.introducing(supertype)
        };
        let Some(target) = target.and_then(|s| self.full.system_position(&s.name)) else {
            self.report
                .warnings
                .push(format!("no system to receive actions raised to {supertype}; dropped"));
            return;
        };
        let Some(chooser) = self.choosers[target].clone() else {
            self.report.warnings.push(format!(
                "system {} has no chooser to receive raised actions; dropped",
                self.full.systems()[target].name
            ));
            return;
        };
        let updated = if supertype == self.full.root() {
            extend_chooser(&chooser, &plain).expect("choose actions are never pending")
        } else {
            let (c, hits) = append_after_choice(&chooser, supertype, &plain);
            if hits == 0 {
                self.report.warnings.push(format!(
                    "chooser of {} never chooses {supertype}; raised actions dropped",
                    self.full.systems()[target].name
                ));
            }
            c
        };
        self.choosers[target] = Some(updated);
        let to = self.full.systems()[target].name.clone();
        self.note_percolation(&actions, &to);
    }

    fn note_percolation(&mut self, actions: &Pending, to: &str) {
        for (from, _) in actions {
            let pair = (from.clone(), to.to_string());
            if !self.report.percolated_actions.contains(&pair) {
                self.report.percolated_actions.push(pair);
            }
        }
    }

    fn raise_constraints(
        &mut self,
        supertype: &TypeId,
        inherited: &ConstraintSet,
        chain: &[TypeId],
    ) -> Result<(), ExtractError> {
        if inherited.is_empty() {
            return Ok(());
        }
        let current = self.constraints.get(supertype).cloned().unwrap_or_default();
        let merged = unify_constraints(&current, inherited, self.full).map_err(|source| {
            ExtractError::Unification {
                path: path_text(supertype, chain, supertype),
                source,
            }
        })?;
        self.constraints.insert(supertype.clone(), merged);
        for p in chain {
            let pair = (p.clone(), supertype.clone());
            if !self.report.raised_constraints.contains(&pair) {
                self.report.raised_constraints.push(pair);
            }
        }
        Ok(())
    }
}

fn path_text(supertype: &TypeId, chain: &[TypeId], last: &TypeId) -> String {
    let mut parts: Vec<&str> = vec![supertype.as_str()];
    parts.extend(chain.iter().map(TypeId::as_str));
    if parts.last() != Some(&last.as_str()) {
        parts.push(last.as_str());
    }
    parts.join(" > ")
}

/// The goal types some system can actually select when only goal types are
/// available: a hand-written goal may name a type whose supertypes it omits.
fn reachable_goal(full: &TypeLattice, goal: &GoalTypeSet) -> GoalTypeSet {
    let mut reached: BTreeSet<TypeId> = BTreeSet::from([full.root().clone()]);
    loop {
        let before = reached.len();
        for s in full.systems() {
            let enterable = s
                .entry
                .conjuncts()
                .iter()
                .any(|c| c.iter().all(|t| reached.contains(t)));
            if enterable {
                reached.extend(s.outputs.iter().filter(|o| goal.contains(o)).cloned());
            }
        }
        if reached.len() == before {
            break;
        }
    }
    GoalTypeSet { types: reached, source: goal.source.clone(), sentences: goal.sentences }
}

/// Extracts the subgrammar licensed by `goal`.
pub fn extract_subgrammar(
    full: &TypeLattice,
    goal: &GoalTypeSet,
    options: &ExtractOptions,
) -> Result<(TypeLattice, ExtractionReport), ExtractError> {
    goal.validate(full)?;
    let given = goal;
    let goal = &reachable_goal(full, goal);
    let n = full.systems().len();
    let mut ex = Extraction {
        full,
        goal,
        entries: full
            .systems()
            .iter()
            .map(|s| remove_unsatisfiable(&s.entry, goal))
            .collect(),
        outputs: full.systems().iter().map(|s| s.outputs.clone()).collect(),
        choosers: full.systems().iter().map(|s| s.chooser.clone()).collect(),
        state: vec![State::Untouched; n],
        constraints: full.constraints().clone(),
        pseudo: IndexMap::new(),
        report: ExtractionReport {
            goal_types: given.len(),
            ..ExtractionReport::default()
        },
    };
    for t in given.types.difference(&goal.types) {
        ex.report
            .warnings
            .push(format!("goal type {t} can never be selected from the other goal types; ignored"));
    }
    let root = full.root().clone();
    ex.traverse_type(&root, &root, &ConstraintSet::new(), &mut Vec::new(), &mut Vec::new())?;

    let mut sub_types: IndexSet<TypeId> = IndexSet::new();
    sub_types.insert(root.clone());
    for i in 0..n {
        if ex.state[i] == State::Retained {
            sub_types.extend(ex.outputs[i].iter().cloned());
        }
    }

    let mut systems = Vec::new();
    for (i, original) in full.systems().iter().enumerate() {
        if ex.state[i] != State::Retained {
            if ex.state[i] != State::Collapsed {
                ex.report.unreachable_systems.push(original.name.clone());
            }
            continue;
        }
        let chooser = ex.choosers[i].take().map(|c| match &options.responses {
            Some(observed) => prune_chooser_by_responses(&c, observed, &sub_types),
            None => mark_out_of_bounds(&c, &sub_types),
        });
        systems.push(System {
            name: original.name.clone(),
            entry: ex.entries[i].clone(),
            outputs: ex.outputs[i].clone(),
            chooser_name: original.chooser_name.clone(),
            chooser,
        });
    }

    let mut constraints = IndexMap::new();
    for (t, cs) in &ex.constraints {
        if !sub_types.contains(t) {
            continue;
        }
        let mut cs = cs.clone();
        for (label, fillers) in cs.insertions.iter_mut() {
            let mut rewritten = IndexSet::new();
            for f in fillers.iter() {
                let target = ex.pseudo.get(f).unwrap_or(f);
                if target == &root {
                    continue;
                }
                if sub_types.contains(target) {
                    rewritten.insert(target.clone());
                } else {
                    ex.report.warnings.push(format!(
                        "filler {f} of {label} in constraints of {t} is outside the subgrammar; removed"
                    ));
                }
            }
            *fillers = rewritten;
        }
        constraints.insert(t.clone(), cs);
    }

    if !ex.report.raised_constraints.is_empty() {
        ex.report.warnings.push(
            "pseudo-path constraints were unified into the path-start type once, after its outputs were traversed"
                .to_string(),
        );
    }

    let word_type = full.word_type().filter(|w| sub_types.contains(*w)).cloned();
    let sub = TypeLattice::new(
        root,
        systems,
        constraints,
        full.functions().to_vec(),
        word_type,
        LatticeKind::Extracted,
    );
    ex.report.kept_systems = sub.systems().len();
    ex.report.kept_types = sub_types.len();
    Ok((sub, ex.report))
}

/// Per-sentence comparison of a grammar and its subgrammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceVerdict {
    pub index: usize,
    pub label: String,
    pub full_text: Option<String>,
    pub sub_text: Option<String>,
    pub equal: bool,
    /// The subgrammar run used exactly the full run's types that survived
    /// extraction.
    pub used_types_ok: bool,
    pub full_steps: usize,
    pub sub_steps: usize,
    pub out_of_bounds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub sentences: Vec<SentenceVerdict>,
}

impl ConsistencyReport {
    pub fn all_equal(&self) -> bool {
        self.sentences.iter().all(|s| s.equal)
    }

    pub fn equal_count(&self) -> usize {
        self.sentences.iter().filter(|s| s.equal).count()
    }

    pub fn out_of_bounds_count(&self) -> usize {
        self.sentences.iter().filter(|s| s.out_of_bounds).count()
    }

    /// Mean over equal sentences of sub steps / full steps.
    pub fn mean_step_ratio(&self) -> Option<f64> {
        let ratios: Vec<f64> = self
            .sentences
            .iter()
            .filter(|s| s.equal && s.full_steps > 0)
            .map(|s| s.sub_steps as f64 / s.full_steps as f64)
            .collect();
        if ratios.is_empty() {
            None
        } else {
            Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
        }
    }

    /// Σ sub steps / Σ full steps over equal sentences.
    pub fn aggregate_step_ratio(&self) -> Option<f64> {
        let (full, sub) = self
            .sentences
            .iter()
            .filter(|s| s.equal)
            .fold((0usize, 0usize), |(f, s), v| (f + v.full_steps, s + v.sub_steps));
        (full > 0).then(|| sub as f64 / full as f64)
    }
}

/// Generates every spec with both grammars and compares the results.
pub fn verify_consistency(
    full: (&TypeLattice, &Lexicon),
    sub: (&TypeLattice, &Lexicon),
    corpus: &[SemanticSpec],
    exec: Execution,
) -> ConsistencyReport {
    let sub_types: BTreeSet<TypeId> = sub.0.types().into_iter().collect();
    let sentences = map_indexed(exec, corpus, |index, spec| {
        let label = spec.label(index);
        let a = generate_sentence(full.0, full.1, spec);
        let b = generate_sentence(sub.0, sub.1, spec);
        let mut v = SentenceVerdict {
            index,
            label,
            full_text: a.as_ref().ok().map(|r| r.text.clone()),
            sub_text: b.as_ref().ok().map(|r| r.text.clone()),
            equal: false,
            used_types_ok: false,
            full_steps: a.as_ref().map(|r| r.steps).unwrap_or(0),
            sub_steps: b.as_ref().map(|r| r.steps).unwrap_or(0),
            out_of_bounds: b.as_ref().err().is_some_and(|e| e.is_out_of_bounds()),
            error: None,
        };
        match (&a, &b) {
            (Ok(ra), Ok(rb)) => {
                v.equal = ra.text.as_bytes() == rb.text.as_bytes();
                let expected: BTreeSet<TypeId> =
                    ra.used_types.intersection(&sub_types).cloned().collect();
                v.used_types_ok = expected == rb.used_types;
            }
            (Err(e), _) => v.error = Some(format!("full grammar: {e}")),
            (_, Err(e)) => v.error = Some(format!("subgrammar: {e}")),
        }
        v
    });
    ConsistencyReport { sentences }
}
