//! The bundled biography grammar and corpora.

use crate::io::{parse_corpus, parse_grammar};
use crate::lattice::TypeLattice;
use crate::lexicon::Lexicon;
use crate::semantics::SemanticSpec;

pub const GRAMMAR: &str = include_str!("../fixtures/biography.grammar.json");
pub const CORPUS: &str = include_str!("../fixtures/biography.corpus.jsonl");
/// Specs outside the corpus domain (a mental-process clause).
pub const OUT_OF_DOMAIN: &str = include_str!("../fixtures/out_of_domain.jsonl");

pub fn grammar() -> (TypeLattice, Lexicon) {
    parse_grammar(GRAMMAR, "biography.grammar.json").expect("bundled grammar is valid")
}

pub fn corpus() -> Vec<SemanticSpec> {
    parse_corpus(CORPUS, "biography.corpus.jsonl").expect("bundled corpus is valid")
}

pub fn out_of_domain() -> Vec<SemanticSpec> {
    parse_corpus(OUT_OF_DOMAIN, "out_of_domain.jsonl").expect("bundled corpus is valid")
}
