//! Chooser decision trees: semantic inquiries whose leaves select a system
//! output and bind grammatical functions to concepts.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};

use crate::entry::TypeSet;
use crate::semantics::SemanticOracle;
use crate::types::{ConceptId, FunctionLabel, TypeId};

/// A named query to the semantics, with function-label arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InquiryRef {
    pub name: String,
    pub args: Vec<FunctionLabel>,
}

impl fmt::Display for InquiryRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChooserAction {
    Choose(TypeId),
    /// Binds a function to a concept. The concept is named by a path from the
    /// constituent's head concept: `self`, an attribute, or `attr.attr`.
    Identify(FunctionLabel, String),
    Copyhub(FunctionLabel, FunctionLabel),
    OutOfBounds(String),
}

impl ChooserAction {
    pub fn identify(function: &str, concept: &str) -> Self {
        ChooserAction::Identify(function.into(), concept.to_string())
    }

    pub fn choose(t: &str) -> Self {
        ChooserAction::Choose(TypeId::new(t))
    }
}

impl fmt::Display for ChooserAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChooserAction::Choose(t) => write!(f, "(choose {t})"),
            ChooserAction::Identify(func, c) => write!(f, "(identify {func} {c})"),
            ChooserAction::Copyhub(a, b) => write!(f, "(copyhub {a} {b})"),
            ChooserAction::OutOfBounds(r) => write!(f, "(out-of-bounds \"{r}\")"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChooserNode {
    Ask {
        ask: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        args: Vec<FunctionLabel>,
        branches: IndexMap<String, ChooserNode>,
    },
    Actions {
        #[serde(rename = "do")]
        actions: Vec<ChooserAction>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        then: Option<Box<ChooserNode>>,
    },
}

impl ChooserNode {
    pub fn ask(name: &str, args: &[&str], branches: Vec<(&str, ChooserNode)>) -> Self {
        ChooserNode::Ask {
            ask: name.to_string(),
            args: args.iter().map(|a| FunctionLabel::from(*a)).collect(),
            branches: branches
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn leaf(actions: Vec<ChooserAction>) -> Self {
        ChooserNode::Actions { actions, then: None }
    }

    fn inquiry(&self) -> Option<InquiryRef> {
        match self {
            ChooserNode::Ask { ask, args, .. } => Some(InquiryRef {
                name: ask.clone(),
                args: args.clone(),
            }),
            _ => None,
        }
    }
}

/// Decision tree attached to a system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Chooser {
    pub root: ChooserNode,
}

/// One root-to-leaf path: the inquiries asked and the actions performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChooserPath {
    pub asks: Vec<(InquiryRef, String)>,
    pub actions: Vec<ChooserAction>,
}

impl ChooserPath {
    pub fn chosen(&self) -> Option<&TypeId> {
        self.actions.iter().find_map(|a| match a {
            ChooserAction::Choose(t) => Some(t),
            _ => None,
        })
    }

    pub fn choose_count(&self) -> usize {
        self.actions
            .iter()
            .filter(|a| matches!(a, ChooserAction::Choose(_)))
            .count()
    }

    pub fn is_out_of_bounds(&self) -> bool {
        self.actions
            .iter()
            .any(|a| matches!(a, ChooserAction::OutOfBounds(_)))
    }
}

/// Result of evaluating a chooser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChooserOutcome {
    pub chosen: TypeId,
    pub actions: Vec<ChooserAction>,
    pub trace: Vec<(InquiryRef, Vec<ConceptId>, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChooserError {
    #[error("no answer for inquiry {inquiry} with arguments {args:?}")]
    MissingAnswer { inquiry: String, args: Vec<ConceptId> },
    #[error("inquiry {inquiry}: argument {arg} is not bound to a concept")]
    UnboundArgument { inquiry: String, arg: FunctionLabel },
    #[error("inquiry {inquiry}: answer `{answer}` has no branch")]
    NoBranch { inquiry: String, answer: String },
    #[error("chooser path ended without a choose action")]
    NoChoice,
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
    #[error("chooser action {action} failed: {reason}")]
    ActionFailed { action: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("choose actions cannot be percolated: {0}")]
pub struct ChoosePercolated(pub TypeId);

/// What a chooser needs from its surroundings while it walks: resolving
/// inquiry arguments, and applying binding actions as they are passed.
pub trait ChooserEnv {
    fn resolve(&self, arg: &FunctionLabel) -> Option<ConceptId>;
    fn apply(&mut self, action: &ChooserAction) -> Result<(), String>;
}

/// Environment with a fixed binding table. `identify` binds the function
/// to the literal concept id; `copyhub` copies the first binding.
#[derive(Debug, Clone, Default)]
pub struct StaticEnv {
    pub bindings: IndexMap<FunctionLabel, ConceptId>,
}

impl StaticEnv {
    pub fn with(pairs: &[(&str, &str)]) -> Self {
        StaticEnv {
            bindings: pairs
                .iter()
                .map(|(f, c)| (FunctionLabel::from(*f), ConceptId::from(*c)))
                .collect(),
        }
    }
}

impl ChooserEnv for StaticEnv {
    fn resolve(&self, arg: &FunctionLabel) -> Option<ConceptId> {
        self.bindings.get(arg).cloned()
    }

    fn apply(&mut self, action: &ChooserAction) -> Result<(), String> {
        match action {
            ChooserAction::Identify(f, c) => {
                self.bindings.insert(f.clone(), ConceptId::from(c.as_str()));
            }
            ChooserAction::Copyhub(a, b) => {
                if let Some(c) = self.bindings.get(a).cloned() {
                    self.bindings.insert(b.clone(), c);
                }
            }
            _ => {}
        }
        Ok(())
    }
}

impl Chooser {
    pub fn new(root: ChooserNode) -> Self {
        Chooser { root }
    }

    /// A chooser that unconditionally performs `actions`.
    pub fn from_actions(actions: Vec<ChooserAction>) -> Self {
        Chooser { root: ChooserNode::leaf(actions) }
    }

    /// Every root-to-leaf path, in branch order.
    pub fn paths(&self) -> Vec<ChooserPath> {
        fn walk(node: &ChooserNode, prefix: ChooserPath, out: &mut Vec<ChooserPath>) {
            match node {
                ChooserNode::Ask { branches, .. } => {
                    let inquiry = node.inquiry().expect("ask node");
                    for (answer, child) in branches {
                        let mut p = prefix.clone();
                        p.asks.push((inquiry.clone(), answer.clone()));
                        walk(child, p, out);
                    }
                }
                ChooserNode::Actions { actions, then } => {
                    let mut p = prefix;
                    p.actions.extend(actions.iter().cloned());
                    match then {
                        Some(next) => walk(next, p, out),
                        None => out.push(p),
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(
            &self.root,
            ChooserPath { asks: Vec::new(), actions: Vec::new() },
            &mut out,
        );
        out
    }

    /// Types targeted by some `choose` action.
    pub fn chosen_types(&self) -> IndexSet<TypeId> {
        let mut out = IndexSet::new();
        self.for_each_action(&mut |a| {
            if let ChooserAction::Choose(t) = a {
                out.insert(t.clone());
            }
        });
        out
    }

    /// Inquiry names used anywhere in the tree.
    pub fn inquiries(&self) -> BTreeSet<String> {
        fn walk(node: &ChooserNode, out: &mut BTreeSet<String>) {
            match node {
                ChooserNode::Ask { ask, branches, .. } => {
                    out.insert(ask.clone());
                    branches.values().for_each(|c| walk(c, out));
                }
                ChooserNode::Actions { then, .. } => {
                    if let Some(n) = then {
                        walk(n, out);
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(&self.root, &mut out);
        out
    }

    fn for_each_action(&self, f: &mut dyn FnMut(&ChooserAction)) {
        fn walk(node: &ChooserNode, f: &mut dyn FnMut(&ChooserAction)) {
            match node {
                ChooserNode::Ask { branches, .. } => branches.values().for_each(|c| walk(c, f)),
                ChooserNode::Actions { actions, then } => {
                    actions.iter().for_each(&mut *f);
                    if let Some(n) = then {
                        walk(n, f);
                    }
                }
            }
        }
        walk(&self.root, f)
    }

    /// Structural problems: empty ask nodes, and paths that do not choose
    /// exactly once. Extracted choosers may have paths that end out of
    /// bounds instead of choosing.
    pub fn violations(&self, extracted: bool) -> Vec<String> {
        let mut out = Vec::new();
        fn empty_asks(node: &ChooserNode, out: &mut Vec<String>) {
            match node {
                ChooserNode::Ask { ask, branches, .. } => {
                    if branches.is_empty() {
                        out.push(format!("inquiry {ask} has no branches"));
                    }
                    branches.values().for_each(|c| empty_asks(c, out));
                }
                ChooserNode::Actions { then, .. } => {
                    if let Some(n) = then {
                        empty_asks(n, out);
                    }
                }
            }
        }
        empty_asks(&self.root, &mut out);
        for path in self.paths() {
            let n = path.choose_count();
            let ok = if extracted {
                n <= 1 && (n == 1 || path.is_out_of_bounds())
            } else {
                n == 1
            };
            if !ok {
                let route: Vec<String> = path
                    .asks
                    .iter()
                    .map(|(q, a)| format!("{}={a}", q.name))
                    .collect();
                out.push(format!(
                    "path [{}] performs {n} choose actions",
                    route.join(", ")
                ));
            }
        }
        out
    }
}

/// Walks the chooser from the root, asking the oracle once per inquiry on the
/// taken path and applying actions to `env` in path order. The first `choose`
/// wins; later ones on the same path are ignored.
pub fn evaluate_chooser(
    chooser: &Chooser,
    oracle: &dyn SemanticOracle,
    env: &mut dyn ChooserEnv,
) -> Result<ChooserOutcome, ChooserError> {
    let mut chosen: Option<TypeId> = None;
    let mut actions = Vec::new();
    let mut trace = Vec::new();
    let mut node = &chooser.root;
    loop {
        match node {
            ChooserNode::Ask { ask, args, branches } => {
                let mut concepts = Vec::with_capacity(args.len());
                for arg in args {
                    let c = env.resolve(arg).ok_or_else(|| ChooserError::UnboundArgument {
                        inquiry: ask.clone(),
                        arg: arg.clone(),
                    })?;
                    concepts.push(c);
                }
                let answer = oracle.answer(ask, &concepts).ok_or_else(|| {
                    ChooserError::MissingAnswer { inquiry: ask.clone(), args: concepts.clone() }
                })?;
                let next = branches.get(answer).ok_or_else(|| ChooserError::NoBranch {
                    inquiry: ask.clone(),
                    answer: answer.to_string(),
                })?;
                trace.push((node.inquiry().expect("ask"), concepts, answer.to_string()));
                node = next;
            }
            ChooserNode::Actions { actions: step, then } => {
                for action in step {
                    match action {
                        ChooserAction::OutOfBounds(reason) => {
                            return Err(ChooserError::OutOfBounds(reason.clone()));
                        }
                        ChooserAction::Choose(t) => {
                            if chosen.is_none() {
                                chosen = Some(t.clone());
                                actions.push(action.clone());
                            }
                        }
                        _ => {
                            env.apply(action).map_err(|reason| ChooserError::ActionFailed {
                                action: action.to_string(),
                                reason,
                            })?;
                            actions.push(action.clone());
                        }
                    }
                }
                match then {
                    Some(next) => node = next,
                    None => break,
                }
            }
        }
    }
    let chosen = chosen.ok_or(ChooserError::NoChoice)?;
    Ok(ChooserOutcome { chosen, actions, trace })
}

/// Prepends `pending` so it runs on every path before any inquiry.
pub fn extend_chooser(
    base: &Chooser,
    pending: &[ChooserAction],
) -> Result<Chooser, ChoosePercolated> {
    if let Some(ChooserAction::Choose(t)) =
        pending.iter().find(|a| matches!(a, ChooserAction::Choose(_)))
    {
        return Err(ChoosePercolated(t.clone()));
    }
    if pending.is_empty() {
        return Ok(base.clone());
    }
    let root = match &base.root {
        ChooserNode::Actions { actions, then } => ChooserNode::Actions {
            actions: pending.iter().chain(actions.iter()).cloned().collect(),
            then: then.clone(),
        },
        ask => ChooserNode::Actions {
            actions: pending.to_vec(),
            then: Some(Box::new(ask.clone())),
        },
    };
    Ok(Chooser { root })
}

/// Inserts `extra` directly after every `choose(t)` action, so the actions
/// run exactly when `t` is selected.
pub fn append_after_choice(base: &Chooser, t: &TypeId, extra: &[ChooserAction]) -> (Chooser, usize) {
    fn walk(node: &ChooserNode, t: &TypeId, extra: &[ChooserAction], hits: &mut usize) -> ChooserNode {
        match node {
            ChooserNode::Ask { ask, args, branches } => ChooserNode::Ask {
                ask: ask.clone(),
                args: args.clone(),
                branches: branches
                    .iter()
                    .map(|(k, v)| (k.clone(), walk(v, t, extra, hits)))
                    .collect(),
            },
            ChooserNode::Actions { actions, then } => {
                let mut out = Vec::with_capacity(actions.len() + extra.len());
                for a in actions {
                    out.push(a.clone());
                    if matches!(a, ChooserAction::Choose(c) if c == t) {
                        out.extend(extra.iter().cloned());
                        *hits += 1;
                    }
                }
                ChooserNode::Actions {
                    actions: out,
                    then: then.as_ref().map(|n| Box::new(walk(n, t, extra, hits))),
                }
            }
        }
    }
    let mut hits = 0;
    let root = walk(&base.root, t, extra, &mut hits);
    (Chooser { root }, hits)
}

fn excised(t: &TypeId) -> ChooserAction {
    ChooserAction::OutOfBounds(format!("type {t} excised"))
}

fn mark_node(node: &ChooserNode, surviving: &dyn TypeSet) -> ChooserNode {
    match node {
        ChooserNode::Ask { ask, args, branches } => ChooserNode::Ask {
            ask: ask.clone(),
            args: args.clone(),
            branches: branches
                .iter()
                .map(|(k, v)| (k.clone(), mark_node(v, surviving)))
                .collect(),
        },
        ChooserNode::Actions { actions, then } => ChooserNode::Actions {
            actions: actions
                .iter()
                .map(|a| match a {
                    ChooserAction::Choose(t) if !surviving.has(t) => excised(t),
                    other => other.clone(),
                })
                .collect(),
            then: then.as_ref().map(|n| Box::new(mark_node(n, surviving))),
        },
    }
}

/// Replaces every `choose(t)` with `t` outside `surviving` by an
/// out-of-bounds marker. All inquiries are kept.
pub fn mark_out_of_bounds(chooser: &Chooser, surviving: &dyn TypeSet) -> Chooser {
    Chooser { root: mark_node(&chooser.root, surviving) }
}

/// Inquiry responses observed during training, per inquiry name.
pub type ObservedResponses = IndexMap<String, IndexSet<String>>;

/// Replaces branches whose answer was never observed by out-of-bounds
/// leaves, elides inquiries left with a single observed answer, and marks
/// choices of types outside `surviving`.
pub fn prune_chooser_by_responses(
    chooser: &Chooser,
    observed: &ObservedResponses,
    surviving: &dyn TypeSet,
) -> Chooser {
    fn prune(node: &ChooserNode, observed: &ObservedResponses, surviving: &dyn TypeSet) -> ChooserNode {
        match node {
            ChooserNode::Ask { ask, args, branches } => {
                let seen = observed.get(ask);
                let live: Vec<(&String, &ChooserNode)> = branches
                    .iter()
                    .filter(|(answer, _)| seen.is_some_and(|s| s.contains(*answer)))
                    .collect();
                match live.as_slice() {
                    [] => ChooserNode::leaf(vec![ChooserAction::OutOfBounds(format!(
                        "no observed response to {ask}"
                    ))]),
                    [(_, only)] => prune(only, observed, surviving),
                    _ => ChooserNode::Ask {
                        ask: ask.clone(),
                        args: args.clone(),
                        branches: branches
                            .iter()
                            .map(|(answer, child)| {
                                let next = if seen.is_some_and(|s| s.contains(answer)) {
                                    prune(child, observed, surviving)
                                } else {
                                    ChooserNode::leaf(vec![ChooserAction::OutOfBounds(format!(
                                        "response {answer} to {ask} not observed"
                                    ))])
                                };
                                (answer.clone(), next)
                            })
                            .collect(),
                    },
                }
            }
            ChooserNode::Actions { actions, then } => {
                let actions: Vec<ChooserAction> = actions
                    .iter()
                    .map(|a| match a {
                        ChooserAction::Choose(t) if !surviving.has(t) => excised(t),
                        other => other.clone(),
                    })
                    .collect();
                match then.as_ref().map(|n| prune(n, observed, surviving)) {
                    Some(ChooserNode::Actions { actions: more, then }) => ChooserNode::Actions {
                        actions: actions.into_iter().chain(more).collect(),
                        then,
                    },
                    other => ChooserNode::Actions { actions, then: other.map(Box::new) },
                }
            }
        }
    }
    Chooser { root: prune(&chooser.root, observed, surviving) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::AnswerTable;

    fn mood() -> Chooser {
        Chooser::new(ChooserNode::ask(
            "speechact",
            &["self"],
            vec![
                ("statement", ChooserNode::leaf(vec![ChooserAction::choose("declarative")])),
                ("question", ChooserNode::leaf(vec![ChooserAction::choose("interrogative")])),
            ],
        ))
    }

    fn oracle(answer: &str) -> AnswerTable {
        AnswerTable::from_rows(&[("speechact", &["s1"], answer)])
    }

    fn env() -> StaticEnv {
        StaticEnv::with(&[("self", "s1")])
    }

    fn all_types(names: &[&str]) -> Vec<TypeId> {
        names.iter().map(|n| TypeId::new(n)).collect()
    }

    #[test]
    fn single_leaf() {
        let c = Chooser::from_actions(vec![ChooserAction::choose("declarative")]);
        let out = evaluate_chooser(&c, &AnswerTable::default(), &mut env()).unwrap();
        assert_eq!(out.chosen.as_str(), "declarative");
        assert!(out.trace.is_empty());
    }

    #[test]
    fn statement_selects_declarative() {
        let out = evaluate_chooser(&mood(), &oracle("statement"), &mut env()).unwrap();
        assert_eq!(out.chosen.as_str(), "declarative");
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].2, "statement");
    }

    #[test]
    fn evaluation_errors() {
        let err = evaluate_chooser(&mood(), &AnswerTable::default(), &mut env()).unwrap_err();
        assert!(matches!(err, ChooserError::MissingAnswer { .. }));
        let err = evaluate_chooser(&mood(), &oracle("command"), &mut env()).unwrap_err();
        assert!(matches!(err, ChooserError::NoBranch { .. }));
        let err = evaluate_chooser(&mood(), &oracle("statement"), &mut StaticEnv::default())
            .unwrap_err();
        assert!(matches!(err, ChooserError::UnboundArgument { .. }));
        let none = Chooser::from_actions(vec![ChooserAction::identify("Subject", "agent")]);
        let err = evaluate_chooser(&none, &AnswerTable::default(), &mut env()).unwrap_err();
        assert_eq!(err, ChooserError::NoChoice);
    }

    #[test]
    fn first_choose_wins() {
        let c = Chooser::from_actions(vec![
            ChooserAction::choose("a"),
            ChooserAction::choose("b"),
        ]);
        let out = evaluate_chooser(&c, &AnswerTable::default(), &mut env()).unwrap();
        assert_eq!(out.chosen.as_str(), "a");
        assert_eq!(out.actions.len(), 1);
    }

    #[test]
    fn marked_question_branch_is_out_of_bounds() {
        let marked = mark_out_of_bounds(&mood(), &all_types(&["declarative"]));
        let err = evaluate_chooser(&marked, &oracle("question"), &mut env()).unwrap_err();
        assert!(matches!(err, ChooserError::OutOfBounds(_)));
        let ok = evaluate_chooser(&marked, &oracle("statement"), &mut env()).unwrap();
        assert_eq!(ok.chosen.as_str(), "declarative");
        // the inquiry itself is retained
        assert_eq!(marked.inquiries().len(), 1);
    }

    #[test]
    fn marking_with_everything_surviving_is_identity() {
        let c = mood();
        assert_eq!(mark_out_of_bounds(&c, &all_types(&["declarative", "interrogative"])), c);
    }

    #[test]
    fn marking_with_nothing_surviving_marks_every_leaf() {
        let marked = mark_out_of_bounds(&mood(), &Vec::<TypeId>::new());
        assert!(marked.paths().iter().all(|p| p.is_out_of_bounds() && p.chosen().is_none()));
    }

    #[test]
    fn extend_prepends_actions() {
        let pending = vec![ChooserAction::identify("Subject", "c1")];
        let ext = extend_chooser(&mood(), &pending).unwrap();
        for answer in ["statement", "question"] {
            let base = evaluate_chooser(&mood(), &oracle(answer), &mut env()).unwrap();
            let out = evaluate_chooser(&ext, &oracle(answer), &mut env()).unwrap();
            assert_eq!(out.chosen, base.chosen);
            assert_eq!(out.actions[0], pending[0]);
            assert_eq!(&out.actions[1..], &base.actions[..]);
        }
        assert_eq!(extend_chooser(&mood(), &[]).unwrap(), mood());
        assert!(extend_chooser(&mood(), &[ChooserAction::choose("x")]).is_err());
    }

    #[test]
    fn prune_elides_single_observed_answer() {
        let mut observed = ObservedResponses::new();
        observed.entry("speechact".into()).or_default().insert("statement".into());
        let pruned =
            prune_chooser_by_responses(&mood(), &observed, &all_types(&["declarative"]));
        assert_eq!(pruned, Chooser::from_actions(vec![ChooserAction::choose("declarative")]));
    }

    #[test]
    fn prune_with_everything_observed_is_identity() {
        let mut observed = ObservedResponses::new();
        let e = observed.entry("speechact".into()).or_default();
        e.insert("statement".into());
        e.insert("question".into());
        let surviving = all_types(&["declarative", "interrogative"]);
        assert_eq!(prune_chooser_by_responses(&mood(), &observed, &surviving), mood());
        // an excised choice still becomes out of bounds
        let pruned = prune_chooser_by_responses(&mood(), &observed, &all_types(&["declarative"]));
        let err = evaluate_chooser(&pruned, &oracle("question"), &mut env()).unwrap_err();
        assert!(matches!(err, ChooserError::OutOfBounds(_)));
    }

    #[test]
    fn append_after_choice_targets_one_type() {
        let extra = [ChooserAction::identify("Subject", "agent")];
        let (c, hits) = append_after_choice(&mood(), &TypeId::new("declarative"), &extra);
        assert_eq!(hits, 1);
        let out = evaluate_chooser(&c, &oracle("statement"), &mut env()).unwrap();
        assert_eq!(out.actions.len(), 2);
        let out = evaluate_chooser(&c, &oracle("question"), &mut env()).unwrap();
        assert_eq!(out.actions.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let c = extend_chooser(&mood(), &[ChooserAction::identify("Subject", "agent")]).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.starts_with(r#"{"do":[{"identify":["Subject","agent"]}],"then":{"ask":"speechact""#));
        let back: Chooser = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn authored_paths_choose_once() {
        assert!(mood().violations(false).is_empty());
        let bad = Chooser::from_actions(vec![ChooserAction::identify("A", "b")]);
        assert_eq!(bad.violations(false).len(), 1);
        let marked = mark_out_of_bounds(&mood(), &Vec::<TypeId>::new());
        assert!(marked.violations(true).is_empty());
    }
}
