//! Identifier newtypes shared across the crate.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Name of a grammatical type. Type names are case-insensitive and are
/// stored lower-cased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(String);

impl TypeId {
    pub fn new(name: &str) -> Self {
        TypeId(name.trim().to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for TypeId {
    fn from(s: &str) -> Self {
        TypeId::new(s)
    }
}

impl From<String> for TypeId {
    fn from(s: String) -> Self {
        TypeId::new(&s)
    }
}

impl Borrow<str> for TypeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TypeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for TypeId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for TypeId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(TypeId::new(&s))
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                $name(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

string_id!(
    /// Grammatical function label such as `Subject` or `Thing`.
    FunctionLabel
);

string_id!(
    /// Identifier of a concept in a semantic specification.
    ConceptId
);

string_id!(
    /// Identifier of a lexical item.
    LexId
);

/// Convenience for building type sets in tests and fixtures.
pub fn type_ids<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<TypeId> {
    names.into_iter().map(TypeId::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn type_ids_are_case_insensitive() {
        assert_eq!(TypeId::new("Class_Name"), TypeId::new("class_name"));
        assert_eq!(TypeId::new(" START ").as_str(), "start");
    }

    #[test]
    fn function_labels_keep_case() {
        assert_ne!(FunctionLabel::from("Subject"), FunctionLabel::from("subject"));
    }
}
