//! File formats: the JSON grammar document, JSONL corpora, goal-type lists
//! and training logs.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize};

use crate::chooser::Chooser;
use crate::constraints::ConstraintSet;
use crate::entry::{Dnf, EntryExpr};
use crate::extractor::GoalTypeSet;
use crate::lattice::{validate_lattice, LatticeKind, System, TypeLattice, ValidationReport, ROOT_TYPE};
use crate::lexicon::{LexItem, Lexicon};
use crate::semantics::SemanticSpec;
use crate::telemetry::TrainingLog;
use crate::types::{FunctionLabel, TypeId};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse { origin: String, line: usize, column: usize, message: String },
    #[error("{origin}: invalid grammar:\n{report}")]
    Validation { origin: String, report: ValidationReport },
}

impl LoadError {
    fn parse(origin: &str, e: &serde_json::Error, line_offset: usize) -> Self {
        LoadError::Parse {
            origin: origin.to_string(),
            line: e.line() + line_offset,
            column: e.column(),
            message: strip_position(&e.to_string()),
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), LoadError> {
    fs::write(path, text).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn default_root() -> TypeId {
    TypeId::new(ROOT_TYPE)
}

fn is_authored(k: &DocKind) -> bool {
    *k == DocKind::Authored
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    #[default]
    Authored,
    Extracted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub name: String,
    pub entry: EntryExpr,
    pub outputs: Vec<TypeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chooser: Option<String>,
}

/// The on-disk grammar: lattice, choosers, constraints and lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarDocument {
    pub format_version: u32,
    #[serde(default = "default_root")]
    pub root: TypeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_type: Option<TypeId>,
    #[serde(default, skip_serializing_if = "is_authored")]
    pub kind: DocKind,
    pub types: Vec<TypeId>,
    #[serde(default)]
    pub functions: Vec<FunctionLabel>,
    #[serde(deserialize_with = "unique_systems")]
    pub systems: Vec<SystemDoc>,
    #[serde(default)]
    pub choosers: IndexMap<String, Chooser>,
    #[serde(default)]
    pub constraints: IndexMap<TypeId, ConstraintSet>,
    #[serde(default, deserialize_with = "unique_items")]
    pub lexicon: Vec<LexItem>,
}

fn unique_systems<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SystemDoc>, D::Error> {
    let systems = Vec::<SystemDoc>::deserialize(d)?;
    let mut seen = BTreeSet::new();
    for s in &systems {
        if !seen.insert(s.name.as_str()) {
            return Err(serde::de::Error::custom(format!("duplicate system name {}", s.name)));
        }
    }
    Ok(systems)
}

fn unique_items<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<LexItem>, D::Error> {
    let items = Vec::<LexItem>::deserialize(d)?;
    let mut seen = BTreeSet::new();
    for i in &items {
        if !seen.insert(i.id.as_str()) {
            return Err(serde::de::Error::custom(format!("duplicate lexical item {}", i.id)));
        }
    }
    Ok(items)
}

impl GrammarDocument {
    pub fn from_model(lattice: &TypeLattice, lexicon: &Lexicon) -> Self {
        let mut choosers: IndexMap<String, Chooser> = IndexMap::new();
        let mut systems = Vec::with_capacity(lattice.systems().len());
        for s in lattice.systems() {
            let chooser = s.chooser.as_ref().map(|c| {
                let mut name = s.chooser_name.clone().unwrap_or_else(|| s.name.clone());
                if choosers.get(&name).is_some_and(|existing| existing != c) {
                    name = format!("{}.chooser", s.name);
                }
                choosers.insert(name.clone(), c.clone());
                name
            });
            systems.push(SystemDoc {
                name: s.name.clone(),
                entry: s.entry.to_compact_expr().unwrap_or_else(|| EntryExpr::Or(Vec::new())),
                outputs: s.outputs.clone(),
                chooser,
            });
        }
        GrammarDocument {
            format_version: FORMAT_VERSION,
            root: lattice.root().clone(),
            word_type: lattice.word_type().cloned(),
            kind: match lattice.kind() {
                LatticeKind::Authored => DocKind::Authored,
                LatticeKind::Extracted => DocKind::Extracted,
            },
            types: lattice.types().into_iter().collect(),
            functions: lattice.functions().to_vec(),
            systems,
            choosers,
            constraints: lattice.constraints().clone(),
            lexicon: lexicon.items().cloned().collect(),
        }
    }

    /// Builds and validates the in-memory model.
    pub fn into_model(self, origin: &str) -> Result<(TypeLattice, Lexicon), LoadError> {
        let mut report = ValidationReport::default();
        let mut systems = Vec::with_capacity(self.systems.len());
        for s in self.systems {
            let mut system = System::new(&s.name, Dnf::from_expr(&s.entry), s.outputs);
            if let Some(name) = s.chooser {
                match self.choosers.get(&name) {
                    Some(c) => system = system.with_chooser(&name, c.clone()),
                    None => report.violations.push(crate::lattice::Violation {
                        location: format!("system {}", s.name),
                        message: format!("chooser {name} is not defined"),
                    }),
                }
            }
            systems.push(system);
        }
        let kind = match self.kind {
            DocKind::Authored => LatticeKind::Authored,
            DocKind::Extracted => LatticeKind::Extracted,
        };
        let lattice = TypeLattice::new(self.root, systems, self.constraints, self.functions, self.word_type, kind);
        report.violations.extend(validate_lattice(&lattice).violations);
        let defined = lattice.types();
        let declared: BTreeSet<&TypeId> = self.types.iter().collect();
        for t in &defined {
            if !declared.contains(t) {
                report.violations.push(crate::lattice::Violation {
                    location: "types".into(),
                    message: format!("type {t} is defined by a system but not declared"),
                });
            }
        }
        for t in &self.types {
            if !defined.contains(t) {
                report.violations.push(crate::lattice::Violation {
                    location: "types".into(),
                    message: format!("declared type {t} is not introduced by any system"),
                });
            }
        }
        for item in &self.lexicon {
            for c in &item.word_classes {
                if !lattice.defines(c) {
                    report.violations.push(crate::lattice::Violation {
                        location: format!("lexical item {}", item.id),
                        message: format!("word class {c} is undefined"),
                    });
                }
            }
        }
        if !report.is_empty() {
            return Err(LoadError::Validation { origin: origin.to_string(), report });
        }
        let lexicon = Lexicon::from_items(self.lexicon).expect("duplicates rejected while parsing");
        Ok((lattice, lexicon))
    }
}

/// Parses and validates a grammar document.
pub fn parse_grammar(text: &str, origin: &str) -> Result<(TypeLattice, Lexicon), LoadError> {
    let doc: GrammarDocument = serde_json::from_str(text).map_err(|e| LoadError::parse(origin, &e, 0))?;
    if doc.format_version != FORMAT_VERSION {
        return Err(LoadError::Parse {
            origin: origin.to_string(),
            line: 1,
            column: 1,
            message: format!("unsupported format_version {}", doc.format_version),
        });
    }
    doc.into_model(origin)
}

/// Canonical serialization: definition order everywhere, two-space
/// indentation, trailing newline.
pub fn grammar_to_string(lattice: &TypeLattice, lexicon: &Lexicon) -> String {
    let doc = GrammarDocument::from_model(lattice, lexicon);
    let mut s = serde_json::to_string_pretty(&doc).expect("grammar documents always serialize");
    s.push('\n');
    s
}

pub fn load_grammar(path: &Path) -> Result<(TypeLattice, Lexicon), LoadError> {
    parse_grammar(&read(path)?, &path.display().to_string())
}

pub fn save_grammar(lattice: &TypeLattice, lexicon: &Lexicon, path: &Path) -> Result<(), LoadError> {
    write(path, &grammar_to_string(lattice, lexicon))
}

/// One spec per non-blank line.
pub fn parse_corpus(text: &str, origin: &str) -> Result<Vec<SemanticSpec>, LoadError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let spec: SemanticSpec = serde_json::from_str(line).map_err(|e| LoadError::parse(origin, &e, i))?;
        if let Err(e) = spec.validate() {
            return Err(LoadError::Parse {
                origin: origin.to_string(),
                line: i + 1,
                column: 1,
                message: e.to_string(),
            });
        }
        out.push(spec);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<SemanticSpec>, LoadError> {
    parse_corpus(&read(path)?, &path.display().to_string())
}

pub fn corpus_to_string(corpus: &[SemanticSpec]) -> String {
    let mut out = String::new();
    for spec in corpus {
        out.push_str(&serde_json::to_string(spec).expect("specs always serialize"));
        out.push('\n');
    }
    out
}

/// One type per line; blank lines and `#` comments are ignored.
pub fn parse_goal_types(text: &str) -> GoalTypeSet {
    GoalTypeSet::new(
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(TypeId::new),
    )
}

/// Sorted, one type per line.
pub fn goal_types_to_string(goal: &GoalTypeSet) -> String {
    let mut out = String::new();
    for t in &goal.types {
        out.push_str(t.as_str());
        out.push('\n');
    }
    out
}

pub fn load_goal_types(path: &Path) -> Result<GoalTypeSet, LoadError> {
    let mut goal = parse_goal_types(&read(path)?);
    goal.source = Some(path.display().to_string());
    Ok(goal)
}

pub fn save_goal_types(goal: &GoalTypeSet, path: &Path) -> Result<(), LoadError> {
    write(path, &goal_types_to_string(goal))
}

pub fn load_training_log(path: &Path) -> Result<TrainingLog, LoadError> {
    let origin = path.display().to_string();
    serde_json::from_str(&read(path)?).map_err(|e| LoadError::parse(&origin, &e, 0))
}

pub fn training_log_to_string(log: &TrainingLog) -> String {
    let mut s = serde_json::to_string_pretty(log).expect("logs always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = r#"{
  "format_version": 1,
  "types": ["start", "clause", "word", "declarative", "imperative"],
  "systems": [
    {"name": "rank", "entry": "start", "outputs": ["clause", "word"], "chooser": "rank"},
    {"name": "mood", "entry": "clause", "outputs": ["declarative", "imperative"]}
  ],
  "choosers": {"rank": {"do": [{"choose": "clause"}]}},
  "constraints": {"clause": {"insert": {"Process": ["word"]}}},
  "lexicon": [{"id": "go", "spelling": "go", "word_classes": ["word"], "closed_class": false}]
}"#;

    #[test]
    fn parses_and_round_trips() {
        let (l, lex) = parse_grammar(TINY, "tiny").unwrap();
        assert_eq!(l.systems().len(), 2);
        assert_eq!(lex.len(), 1);
        let once = grammar_to_string(&l, &lex);
        let (l2, lex2) = parse_grammar(&once, "once").unwrap();
        assert_eq!(l2, l);
        assert_eq!(lex2, lex);
        assert_eq!(grammar_to_string(&l2, &lex2), once);
    }

    #[test]
    fn duplicate_system_is_parse_error() {
        let dup = TINY.replace(r#""name": "mood""#, r#""name": "rank""#);
        match parse_grammar(&dup, "dup") {
            Err(LoadError::Parse { message, line, .. }) => {
                assert!(message.contains("duplicate system name rank"), "{message}");
                assert!(line > 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_grammar("{\n  \"format_version\": 1,\n  oops\n}", "bad").unwrap_err();
        assert!(matches!(err, LoadError::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn undeclared_type_is_validation_error() {
        let bad = TINY.replace(r#""imperative"]}"#, r#""imperative", "ghost"]}"#);
        let err = parse_grammar(&bad, "bad").unwrap_err();
        assert!(matches!(err, LoadError::Validation { .. }), "{err}");
        assert!(err.to_string().contains("ghost"));
    }

    #[test]
    fn corpus_errors_name_the_line() {
        let text = "{\"root\":\"a\",\"concepts\":{\"a\":{}}}\n\n{\"root\":\"b\",\"concepts\":{}}\n";
        match parse_corpus(text, "c") {
            Err(LoadError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn goal_lines() {
        let g = parse_goal_types("# goals\nstart\n\nClause\n");
        assert_eq!(goal_types_to_string(&g), "clause\nstart\n");
    }
}
