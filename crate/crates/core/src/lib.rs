//! Systemic grammars as type lattices: deterministic generation driven by
//! chooser decision trees, training-phase type collection, and extraction of
//! the subgrammar an application actually needs.
//!
//! ```
//! use subgrammar::{fixture, collect_goal_types, extract_subgrammar, verify_consistency};
//! use subgrammar::{ExtractOptions, Execution};
//!
//! let (full, lexicon) = fixture::grammar();
//! let corpus = fixture::corpus();
//! let training = collect_goal_types(&full, &lexicon, &corpus, Execution::Parallel);
//! let (sub, report) = extract_subgrammar(&full, &training.goal, &ExtractOptions::default()).unwrap();
//! assert!(!report.excised_types.is_empty());
//! let check = verify_consistency((&full, &lexicon), (&sub, &lexicon), &corpus, Execution::Parallel);
//! assert!(check.all_equal());
//! ```

pub mod chooser;
pub mod constraints;
pub mod entry;
pub mod exec;
pub mod extractor;
pub mod fixture;
pub mod generator;
pub mod io;
pub mod lattice;
pub mod lexicon;
pub mod notation;
pub mod semantics;
pub mod telemetry;
pub mod types;

pub use chooser::{
    evaluate_chooser, extend_chooser, mark_out_of_bounds, prune_chooser_by_responses, Chooser,
    ChooserAction, ChooserError, ChooserNode, ObservedResponses,
};
pub use constraints::{unify_constraints, ConstraintSet, LexSelection, UnificationFailure};
pub use entry::{dnf_substitute, entry_satisfied, normalize_entry, remove_unsatisfiable, Dnf, EntryExpr};
pub use exec::Execution;
pub use extractor::{
    extract_subgrammar, verify_consistency, ConsistencyReport, ExtractError, ExtractOptions,
    ExtractionReport, GoalTypeSet,
};
pub use generator::{generate_sentence, generate_with_fallback, GenerationError, Realization};
pub use io::{load_corpus, load_grammar, save_grammar, LoadError};
pub use lattice::{validate_lattice, System, TypeLattice, ROOT_TYPE};
pub use lexicon::{extract_sublexicon, LexItem, Lexicon};
pub use semantics::{SemanticOracle, SemanticSpec};
pub use telemetry::{benchmark, collect_goal_types, emit_growth_curve, BenchReport, GrowthSeries, Training, TrainingLog};
pub use types::{ConceptId, FunctionLabel, LexId, TypeId};
