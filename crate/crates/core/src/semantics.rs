//! Semantic specifications: concept graphs plus table-driven inquiry answers.

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::types::ConceptId;

/// Answers named inquiries about concepts.
pub trait SemanticOracle {
    fn answer(&self, inquiry: &str, args: &[ConceptId]) -> Option<&str>;
}

/// Inquiry answers keyed by inquiry name and argument concepts, kept in
/// insertion order for serialization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerTable {
    rows: IndexMap<(String, Vec<ConceptId>), String>,
}

impl AnswerTable {
    pub fn from_rows(rows: &[(&str, &[&str], &str)]) -> Self {
        let mut t = AnswerTable::default();
        for (name, args, answer) in rows {
            t.insert(name, args.iter().map(|a| ConceptId::from(*a)).collect(), answer);
        }
        t
    }

    pub fn insert(&mut self, inquiry: &str, args: Vec<ConceptId>, answer: &str) {
        self.rows.insert((inquiry.to_string(), args), answer.to_string());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[ConceptId], &str)> {
        self.rows
            .iter()
            .map(|((n, a), ans)| (n.as_str(), a.as_slice(), ans.as_str()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl SemanticOracle for AnswerTable {
    fn answer(&self, inquiry: &str, args: &[ConceptId]) -> Option<&str> {
        // IndexMap lookups need an owned key; specs are small
        self.rows
            .get(&(inquiry.to_string(), args.to_vec()))
            .map(String::as_str)
    }
}

impl Serialize for AnswerTable {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<(&str, &[ConceptId], &str)> = self.iter().collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnswerTable {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<(String, Vec<ConceptId>, String)> = Vec::deserialize(d)?;
        let mut t = AnswerTable::default();
        for (name, args, answer) in rows {
            if t.rows.contains_key(&(name.clone(), args.clone())) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate answer for inquiry {name} {args:?}"
                )));
            }
            t.insert(&name, args, &answer);
        }
        Ok(t)
    }
}

/// Attribute map of one concept. Values naming a defined concept are
/// concept references; anything else is a plain symbol.
pub type Attributes = IndexMap<String, String>;

/// A concept graph with a root and an inquiry answer table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub root: ConceptId,
    pub concepts: IndexMap<ConceptId, Attributes>,
    #[serde(default)]
    pub answers: AnswerTable,
}

/// The attribute holding a concept's lexical item.
pub const LEX_ATTRIBUTE: &str = "lex";

/// Concept path naming the head concept itself.
pub const SELF_PATH: &str = "self";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("root concept {0} is not defined")]
    UndefinedRoot(ConceptId),
    #[error("answer row for {inquiry} refers to undefined concept {concept}")]
    UndefinedAnswerConcept { inquiry: String, concept: ConceptId },
}

impl SemanticSpec {
    pub fn label(&self, index: usize) -> String {
        self.id.clone().unwrap_or_else(|| format!("#{}", index + 1))
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if !self.concepts.contains_key(&self.root) {
            return Err(SpecError::UndefinedRoot(self.root.clone()));
        }
        for (name, args, _) in self.answers.iter() {
            if let Some(c) = args.iter().find(|c| !self.concepts.contains_key(*c)) {
                return Err(SpecError::UndefinedAnswerConcept {
                    inquiry: name.to_string(),
                    concept: c.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn attribute(&self, concept: &ConceptId, attr: &str) -> Option<&str> {
        self.concepts.get(concept)?.get(attr).map(String::as_str)
    }

    /// Lexical item of a concept, from its `lex` attribute.
    pub fn lexeme(&self, concept: &ConceptId) -> Option<&str> {
        self.attribute(concept, LEX_ATTRIBUTE)
    }

    /// Follows a dotted attribute path from `head`. `self` names the head.
    pub fn resolve_path(&self, head: &ConceptId, path: &str) -> Option<ConceptId> {
        let mut current = head.clone();
        for step in path.split('.') {
            if step == SELF_PATH {
                continue;
            }
            let next = self.attribute(&current, step)?;
            let next = ConceptId::from(next);
            if !self.concepts.contains_key(&next) {
                return None;
            }
            current = next;
        }
        Some(current)
    }
}

impl SemanticOracle for SemanticSpec {
    fn answer(&self, inquiry: &str, args: &[ConceptId]) -> Option<&str> {
        self.answers.answer(inquiry, args)
    }
}

impl SemanticOracle for HashMap<(String, Vec<ConceptId>), String> {
    fn answer(&self, inquiry: &str, args: &[ConceptId]) -> Option<&str> {
        self.get(&(inquiry.to_string(), args.to_vec())).map(String::as_str)
    }
}
