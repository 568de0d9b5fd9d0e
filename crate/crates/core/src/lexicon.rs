//! Lexicon of stems with word-class types, and sublexicon extraction.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::entry::TypeSet;
use crate::types::{LexId, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexItem {
    pub id: LexId,
    pub spelling: String,
    /// Spelling used when the following word starts with a vowel ("an").
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub before_vowel: Option<String>,
    pub word_classes: Vec<TypeId>,
    pub closed_class: bool,
}

impl LexItem {
    pub fn new(id: &str, spelling: &str, classes: &[&str], closed_class: bool) -> Self {
        LexItem {
            id: LexId::from(id),
            spelling: spelling.to_string(),
            before_vowel: None,
            word_classes: classes.iter().map(|c| TypeId::new(c)).collect(),
            closed_class,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    items: IndexMap<LexId, LexItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duplicate lexical item {0}")]
pub struct DuplicateItem(pub LexId);

impl Lexicon {
    pub fn from_items(items: Vec<LexItem>) -> Result<Self, DuplicateItem> {
        let mut map = IndexMap::new();
        for item in items {
            if map.contains_key(&item.id) {
                return Err(DuplicateItem(item.id));
            }
            map.insert(item.id.clone(), item);
        }
        Ok(Lexicon { items: map })
    }

    pub fn get(&self, id: &str) -> Option<&LexItem> {
        self.items.get(id)
    }

    pub fn items(&self) -> impl Iterator<Item = &LexItem> {
        self.items.values()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.items.contains_key(id)
    }
}

/// Keeps closed-class items that were used, and open-class items with a word
/// class in `sub_types`.
pub fn extract_sublexicon<U>(lexicon: &Lexicon, sub_types: &dyn TypeSet, usage: &U) -> Lexicon
where
    U: Fn(&LexId) -> bool,
{
    Lexicon {
        items: lexicon
            .items
            .iter()
            .filter(|(id, item)| {
                if item.closed_class {
                    usage(id)
                } else {
                    item.word_classes.iter().any(|c| sub_types.has(c))
                }
            })
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::type_ids;

    fn lex() -> Lexicon {
        Lexicon::from_items(vec![
            LexItem::new("a", "a", &["determiner"], true),
            LexItem::new("which", "which", &["determiner"], true),
            LexItem::new("painter", "painter", &["common_noun"], false),
            LexItem::new("someone", "someone", &["pronoun"], false),
        ])
        .unwrap()
    }

    #[test]
    fn full_usage_keeps_everything() {
        let all = type_ids(["determiner", "common_noun", "pronoun"]);
        let out = extract_sublexicon(&lex(), &all, &|_: &LexId| true);
        assert_eq!(out, lex());
    }

    #[test]
    fn unused_closed_and_excised_open_items_removed() {
        let sub = type_ids(["determiner", "common_noun"]);
        let out = extract_sublexicon(&lex(), &sub, &|id: &LexId| id.as_str() == "a");
        let ids: Vec<&str> = out.items().map(|i| i.id.as_str()).collect();
        assert_eq!(ids, ["a", "painter"]);
    }

    #[test]
    fn duplicates_rejected() {
        let dup = vec![LexItem::new("a", "a", &[], true), LexItem::new("a", "an", &[], true)];
        assert!(Lexicon::from_items(dup).is_err());
    }
}
