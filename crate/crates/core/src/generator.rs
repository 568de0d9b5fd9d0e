//! Deterministic top-down sentence generation.
//!
//! For every constituent the generator runs an agenda over the lattice: the
//! first system (in definition order) whose entry is satisfied by the types
//! selected so far fires, its chooser picks an output, and the output's
//! constraints are unified into the constituent's description. When no
//! system can fire, the accumulated insertions are grouped into constituents
//! by coreference, word-level constituents are spelled from the lexicon, the
//! rest are generated recursively, and everything is linearized.

use std::collections::{BTreeSet, HashMap};

use indexmap::{IndexMap, IndexSet};

use crate::chooser::{evaluate_chooser, ChooserAction, ChooserEnv, ChooserError, InquiryRef};
use crate::constraints::{unify_constraints, ConstraintSet, LexSelection, UnificationFailure};
use crate::entry::entry_satisfied;
use crate::lattice::TypeLattice;
use crate::lexicon::{LexItem, Lexicon};
use crate::semantics::{SemanticOracle, SemanticSpec, SpecError, SELF_PATH};
use crate::types::{ConceptId, FunctionLabel, LexId, TypeId};

const MAX_DEPTH: usize = 32;

/// Coreference classes of function labels with their concept bindings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coref {
    parent: HashMap<FunctionLabel, FunctionLabel>,
    bindings: HashMap<FunctionLabel, ConceptId>,
}

impl Coref {
    pub fn find(&self, label: &FunctionLabel) -> FunctionLabel {
        let mut cur = label;
        while let Some(p) = self.parent.get(cur) {
            if p == cur {
                break;
            }
            cur = p;
        }
        cur.clone()
    }

    pub fn same_class(&self, a: &FunctionLabel, b: &FunctionLabel) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn binding(&self, label: &FunctionLabel) -> Option<&ConceptId> {
        self.bindings.get(&self.find(label))
    }

    pub fn bind(&mut self, label: &FunctionLabel, concept: ConceptId) -> Result<(), String> {
        let root = self.find(label);
        match self.bindings.get(&root) {
            Some(existing) if *existing != concept => Err(format!(
                "{label} is already bound to {existing}, cannot bind to {concept}"
            )),
            _ => {
                self.bindings.insert(root, concept);
                Ok(())
            }
        }
    }

    pub fn union(&mut self, a: &FunctionLabel, b: &FunctionLabel) -> Result<(), String> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let (keep, gone) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        if let Some(cb) = self.bindings.remove(&gone) {
            match self.bindings.get(&keep).cloned() {
                Some(ck) if ck != cb => {
                    self.bindings.insert(gone, cb.clone());
                    return Err(format!("{a} and {b} are bound to different concepts {ck} and {cb}"));
                }
                _ => {
                    self.bindings.insert(keep.clone(), cb);
                }
            }
        }
        self.parent.insert(gone, keep);
        Ok(())
    }
}

/// Per-constituent traversal state.
#[derive(Debug, Clone)]
pub struct GenContext {
    pub head: ConceptId,
    pub selected: IndexSet<TypeId>,
    pub preselected: IndexSet<TypeId>,
    pub accumulated: ConstraintSet,
    pub coref: Coref,
    pub fired: Vec<String>,
    pub trace: Vec<(InquiryRef, Vec<ConceptId>, String)>,
}

impl GenContext {
    /// Fresh context for `head`: only the root is selected and the root's
    /// constraints are accumulated.
    pub fn new(lattice: &TypeLattice, head: ConceptId) -> Self {
        let mut selected = IndexSet::new();
        selected.insert(lattice.root().clone());
        let mut ctx = GenContext {
            head,
            selected,
            preselected: IndexSet::new(),
            accumulated: lattice.constraints_of(lattice.root()).cloned().unwrap_or_default(),
            coref: Coref::default(),
            fired: Vec::new(),
            trace: Vec::new(),
        };
        let conflations: Vec<_> = ctx.accumulated.conflations.iter().cloned().collect();
        for (a, b) in conflations {
            // root constraints are validated at load; a conflict here is impossible
            let _ = ctx.coref.union(&a, &b);
        }
        ctx
    }

    pub fn with_preselection(mut self, types: impl IntoIterator<Item = TypeId>) -> Self {
        self.preselected.extend(types);
        self
    }
}

struct Env<'a> {
    spec: &'a SemanticSpec,
    ctx: &'a mut GenContext,
}

impl ChooserEnv for Env<'_> {
    fn resolve(&self, arg: &FunctionLabel) -> Option<ConceptId> {
        if arg.as_str() == SELF_PATH {
            return Some(self.ctx.head.clone());
        }
        self.ctx.coref.binding(arg).cloned()
    }

    fn apply(&mut self, action: &ChooserAction) -> Result<(), String> {
        match action {
            ChooserAction::Identify(f, path) => {
                let concept = self
                    .spec
                    .resolve_path(&self.ctx.head, path)
                    .ok_or_else(|| format!("concept path `{path}` does not resolve from {}", self.ctx.head))?;
                self.ctx.coref.bind(f, concept)
            }
            ChooserAction::Copyhub(a, b) => self.ctx.coref.union(a, b),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenErrorKind {
    #[error("system {system}: {source}")]
    Chooser { system: String, source: ChooserError },
    #[error("system {system} fired but has no chooser")]
    NoChooser { system: String },
    #[error("system {system}: chooser selected {chosen}, which is not an output")]
    InvalidChoice { system: String, chosen: TypeId },
    #[error("system {system}: several outputs preselected: {types:?}")]
    PreselectionConflict { system: String, types: Vec<TypeId> },
    #[error("system {system}: unification failure: {source}")]
    Unification { system: String, source: UnificationFailure },
    #[error("constituent {functions:?}: {source}")]
    ConstituentConflict { functions: Vec<FunctionLabel>, source: UnificationFailure },
    #[error("coreference conflict: {0}")]
    Binding(String),
    #[error("ordering constraints are cyclic among {0:?}")]
    OrderCycle(Vec<FunctionLabel>),
    #[error("lexical item {0} is not in the lexicon")]
    LexiconMiss(LexId),
    #[error("concept {0} has no lexical item")]
    MissingLexeme(ConceptId),
    #[error("substructure nesting exceeds {MAX_DEPTH} levels")]
    RecursionLimit,
    #[error("invalid semantic specification: {0}")]
    InvalidSpec(#[from] SpecError),
}

/// A generation failure with the path of the constituent that failed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at {path}: {kind}")]
pub struct GenerationError {
    pub path: String,
    pub kind: Box<GenErrorKind>,
}

impl GenerationError {
    pub fn is_out_of_bounds(&self) -> bool {
        matches!(
            *self.kind,
            GenErrorKind::Chooser { source: ChooserError::OutOfBounds(_), .. }
        )
    }

    pub fn is_missing_answer(&self) -> bool {
        matches!(
            *self.kind,
            GenErrorKind::Chooser { source: ChooserError::MissingAnswer { .. }, .. }
        )
    }
}

/// Counters accumulated over a whole sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenStats {
    pub used_types: BTreeSet<TypeId>,
    pub inquiry_log: IndexMap<String, IndexSet<String>>,
    pub lexical_usage: BTreeSet<LexId>,
    pub systems_fired: usize,
    pub inquiries: usize,
}

/// Runs the agenda for one constituent until no further system can fire.
pub fn traverse(
    lattice: &TypeLattice,
    spec: &SemanticSpec,
    ctx: &mut GenContext,
) -> Result<(), GenErrorKind> {
    let systems = lattice.systems();
    let mut fired = vec![false; systems.len()];
    loop {
        let next = systems
            .iter()
            .enumerate()
            .find(|(i, s)| !fired[*i] && entry_satisfied(&s.entry, &ctx.selected));
        let Some((i, system)) = next else { break };
        fired[i] = true;
        ctx.fired.push(system.name.clone());

        let preselected: Vec<TypeId> = system
            .outputs
            .iter()
            .filter(|o| ctx.preselected.contains(*o))
            .cloned()
            .collect();
        let chosen = match preselected.as_slice() {
            [one] => one.clone(),
            [] => {
                let chooser = system.chooser.as_ref().ok_or_else(|| GenErrorKind::NoChooser {
                    system: system.name.clone(),
                })?;
                let mut env = Env { spec, ctx: &mut *ctx };
                let outcome = evaluate_chooser(chooser, spec as &dyn SemanticOracle, &mut env)
                    .map_err(|source| match source {
                        ChooserError::ActionFailed { reason, .. } => GenErrorKind::Binding(reason),
                        source => GenErrorKind::Chooser { system: system.name.clone(), source },
                    })?;
                ctx.trace.extend(outcome.trace);
                outcome.chosen
            }
            _ => {
                return Err(GenErrorKind::PreselectionConflict {
                    system: system.name.clone(),
                    types: preselected,
                })
            }
        };
        if !system.outputs.contains(&chosen) {
            return Err(GenErrorKind::InvalidChoice { system: system.name.clone(), chosen });
        }
        if let Some(cs) = lattice.constraints_of(&chosen) {
            ctx.accumulated = unify_constraints(&ctx.accumulated, cs, lattice).map_err(|source| {
                GenErrorKind::Unification { system: system.name.clone(), source }
            })?;
            for (a, b) in &cs.conflations {
                ctx.coref.union(a, b).map_err(GenErrorKind::Binding)?;
            }
        }
        ctx.selected.insert(chosen);
    }
    Ok(())
}

/// How a constituent is realized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Filling {
    /// Spelled directly; `item` is absent for literal spellings.
    Word { spelling: String, item: Option<LexId> },
    Structure(Box<FeatureStructure>),
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constituent {
    /// The conflated function labels filled by this constituent.
    pub functions: Vec<FunctionLabel>,
    pub filler_types: IndexSet<TypeId>,
    pub concept: Option<ConceptId>,
    pub filling: Filling,
}

/// A generated constituent structure with its immediate constituents in
/// surface order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureStructure {
    pub concept: ConceptId,
    pub selected: IndexSet<TypeId>,
    pub accumulated: ConstraintSet,
    pub constituents: Vec<Constituent>,
}

impl FeatureStructure {
    /// The constituent filling `label`.
    pub fn constituent(&self, label: &str) -> Option<&Constituent> {
        self.constituents
            .iter()
            .find(|c| c.functions.iter().any(|f| f.as_str() == label))
    }

    fn words<'a>(&'a self, out: &mut Vec<(&'a str, Option<&'a LexId>)>) {
        for c in &self.constituents {
            match &c.filling {
                Filling::Word { spelling, item } => out.push((spelling, item.as_ref())),
                Filling::Structure(fs) => fs.words(out),
                Filling::Empty => {}
            }
        }
    }
}

/// Generates the constituent for `concept`. `preselect` carries the filler
/// restriction imposed by the superstructure.
pub fn generate_constituent(
    lattice: &TypeLattice,
    lexicon: &Lexicon,
    spec: &SemanticSpec,
    concept: &ConceptId,
    preselect: &IndexSet<TypeId>,
    stats: &mut GenStats,
) -> Result<FeatureStructure, GenerationError> {
    build(lattice, lexicon, spec, concept, preselect, stats, "", 0)
}

#[allow(clippy::too_many_arguments)]
fn build(
    lattice: &TypeLattice,
    lexicon: &Lexicon,
    spec: &SemanticSpec,
    concept: &ConceptId,
    preselect: &IndexSet<TypeId>,
    stats: &mut GenStats,
    parent_path: &str,
    depth: usize,
) -> Result<FeatureStructure, GenerationError> {
    let path = if parent_path.is_empty() {
        concept.to_string()
    } else {
        format!("{parent_path}/{concept}")
    };
    let fail = |kind| GenerationError { path: path.clone(), kind: Box::new(kind) };
    if depth > MAX_DEPTH {
        return Err(fail(GenErrorKind::RecursionLimit));
    }

    let mut ctx = GenContext::new(lattice, concept.clone()).with_preselection(preselect.iter().cloned());
    let outcome = traverse(lattice, spec, &mut ctx);
    stats.systems_fired += ctx.fired.len();
    stats.inquiries += ctx.trace.len();
    for (q, _, answer) in &ctx.trace {
        stats.inquiry_log.entry(q.name.clone()).or_default().insert(answer.clone());
    }
    outcome.map_err(fail)?;
    stats.used_types.extend(ctx.selected.iter().cloned());

    // group inserted functions into coreference classes
    let mut classes: IndexMap<FunctionLabel, Vec<FunctionLabel>> = IndexMap::new();
    for label in ctx.accumulated.labels() {
        classes.entry(ctx.coref.find(label)).or_default().push(label.clone());
    }

    let mut constituents = Vec::with_capacity(classes.len());
    for members in classes.values() {
        let mut fillers = ConstraintSet::new();
        let mut lexified: Option<LexSelection> = None;
        for m in members {
            let spec_m = &ctx.accumulated.insertions[m];
            let one = ConstraintSet {
                insertions: [(members[0].clone(), spec_m.clone())].into_iter().collect(),
                ..ConstraintSet::default()
            };
            fillers = unify_constraints(&fillers, &one, lattice).map_err(|source| {
                fail(GenErrorKind::ConstituentConflict { functions: members.clone(), source })
            })?;
            if let Some(sel) = ctx.accumulated.lexifications.get(m) {
                match &lexified {
                    Some(prev) if prev != sel => {
                        return Err(fail(GenErrorKind::ConstituentConflict {
                            functions: members.clone(),
                            source: UnificationFailure::LexicalConflict {
                                label: m.clone(),
                                first: prev.clone(),
                                second: sel.clone(),
                            },
                        }))
                    }
                    _ => lexified = Some(sel.clone()),
                }
            }
        }
        let filler_types: IndexSet<TypeId> =
            fillers.insertions.into_values().next().unwrap_or_default();
        let bound = ctx.coref.binding(&members[0]).cloned();
        let lexical = lattice.is_lexical(filler_types.iter());

        let filling = if let Some(sel) = lexified {
            match sel {
                LexSelection::Item(id) => {
                    let item = lexicon
                        .get(id.as_str())
                        .ok_or_else(|| fail(GenErrorKind::LexiconMiss(id.clone())))?;
                    stats.lexical_usage.insert(id.clone());
                    Filling::Word { spelling: item.spelling.clone(), item: Some(id) }
                }
                LexSelection::Literal { literal } => Filling::Word { spelling: literal, item: None },
            }
        } else if let Some(c) = &bound {
            if lexical {
                let lexeme = spec
                    .lexeme(c)
                    .ok_or_else(|| fail(GenErrorKind::MissingLexeme(c.clone())))?;
                let item = lexicon
                    .get(lexeme)
                    .ok_or_else(|| fail(GenErrorKind::LexiconMiss(LexId::from(lexeme))))?;
                stats.lexical_usage.insert(item.id.clone());
                Filling::Word { spelling: item.spelling.clone(), item: Some(item.id.clone()) }
            } else {
                let sub = build(lattice, lexicon, spec, c, &filler_types, stats, &path, depth + 1)?;
                Filling::Structure(Box::new(sub))
            }
        } else {
            Filling::Empty
        };
        if matches!(filling, Filling::Word { .. }) {
            stats.used_types.extend(lattice.implied_closure(filler_types.iter()));
        }
        constituents.push(Constituent {
            functions: members.clone(),
            filler_types,
            concept: bound,
            filling,
        });
    }

    let order = linearize(lattice, &ctx, &constituents).map_err(fail)?;
    let mut slots: Vec<Option<Constituent>> = constituents.into_iter().map(Some).collect();
    let constituents = order
        .into_iter()
        .map(|i| slots[i].take().expect("each index once"))
        .collect();

    Ok(FeatureStructure {
        concept: concept.clone(),
        selected: ctx.selected,
        accumulated: ctx.accumulated,
        constituents,
    })
}

/// Stable topological sort of constituents under the ordering constraints,
/// ties broken by function declaration order.
fn linearize(
    lattice: &TypeLattice,
    ctx: &GenContext,
    constituents: &[Constituent],
) -> Result<Vec<usize>, GenErrorKind> {
    let n = constituents.len();
    let index_of = |label: &FunctionLabel| {
        constituents
            .iter()
            .position(|c| c.functions.iter().any(|f| ctx.coref.same_class(f, label)))
    };
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut indegree = vec![0usize; n];
    for (a, b) in &ctx.accumulated.orderings {
        let (Some(i), Some(j)) = (index_of(a), index_of(b)) else { continue };
        if i == j {
            return Err(GenErrorKind::OrderCycle(vec![a.clone(), b.clone()]));
        }
        if succ[i].insert(j) {
            indegree[j] += 1;
        }
    }
    let key: Vec<usize> = constituents
        .iter()
        .map(|c| c.functions.iter().map(|f| lattice.function_rank(f)).min().unwrap_or(usize::MAX))
        .collect();
    let mut done = vec![false; n];
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let next = (0..n)
            .filter(|&i| !done[i] && indegree[i] == 0)
            .min_by_key(|&i| (key[i], i));
        let Some(i) = next else {
            let stuck = (0..n)
                .filter(|&i| !done[i])
                .flat_map(|i| constituents[i].functions.iter().cloned())
                .collect();
            return Err(GenErrorKind::OrderCycle(stuck));
        };
        done[i] = true;
        out.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
        }
    }
    Ok(out)
}

/// A generated sentence and its training-phase telemetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub text: String,
    pub used_types: BTreeSet<TypeId>,
    pub inquiry_log: IndexMap<String, IndexSet<String>>,
    pub lexical_usage: BTreeSet<LexId>,
    pub systems_fired: usize,
    pub inquiries: usize,
    /// Systems fired plus inquiries asked: the runtime proxy.
    pub steps: usize,
    pub structure: FeatureStructure,
}

/// Generates one sentence for `spec` from its root concept.
pub fn generate_sentence(
    lattice: &TypeLattice,
    lexicon: &Lexicon,
    spec: &SemanticSpec,
) -> Result<Realization, GenerationError> {
    spec.validate().map_err(|e| GenerationError {
        path: spec.root.to_string(),
        kind: Box::new(e.into()),
    })?;
    let mut stats = GenStats::default();
    let structure =
        generate_constituent(lattice, lexicon, spec, &spec.root, &IndexSet::new(), &mut stats)?;
    let text = assemble_text(&structure, lexicon);
    Ok(Realization {
        text,
        used_types: stats.used_types,
        inquiry_log: stats.inquiry_log,
        lexical_usage: stats.lexical_usage,
        systems_fired: stats.systems_fired,
        inquiries: stats.inquiries,
        steps: stats.systems_fired + stats.inquiries,
        structure,
    })
}

/// Generates with `primary`; when that runs out of bounds, regenerates with
/// `fallback`. The flag tells whether the fallback was used.
pub fn generate_with_fallback(
    primary: (&TypeLattice, &Lexicon),
    fallback: (&TypeLattice, &Lexicon),
    spec: &SemanticSpec,
) -> Result<(Realization, bool), GenerationError> {
    match generate_sentence(primary.0, primary.1, spec) {
        Err(e) if e.is_out_of_bounds() => {
            generate_sentence(fallback.0, fallback.1, spec).map(|r| (r, true))
        }
        other => other.map(|r| (r, false)),
    }
}

/// Depth-first, left-to-right spellings joined by single spaces, first
/// letter capitalized, terminal period added when missing.
pub fn assemble_text(structure: &FeatureStructure, lexicon: &Lexicon) -> String {
    let mut words = Vec::new();
    structure.words(&mut words);
    let items: Vec<Option<&LexItem>> = words
        .iter()
        .map(|(_, id)| id.and_then(|id| lexicon.get(id.as_str())))
        .collect();
    let mut parts: Vec<&str> = Vec::with_capacity(words.len());
    for (i, (spelling, _)) in words.iter().enumerate() {
        let next_vowel = words
            .get(i + 1)
            .and_then(|(s, _)| s.chars().next())
            .is_some_and(|c| "aeiouAEIOU".contains(c));
        match items[i].and_then(|it| it.before_vowel.as_deref()) {
            Some(alt) if next_vowel => parts.push(alt),
            _ => parts.push(spelling),
        }
    }
    let joined = parts.join(" ");
    let mut chars = joined.chars();
    let mut text: String = match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    };
    if !text.ends_with('.') {
        text.push('.');
    }
    text
}
