use std::collections::BTreeSet;

use subgrammar::entry::TypeSet;
use subgrammar::*;

fn ids(names: &[&str]) -> Vec<TypeId> {
    names.iter().map(|n| TypeId::new(n)).collect()
}

fn trained_sub() -> (TypeLattice, Lexicon, Training, TypeLattice, ExtractionReport) {
    let (full, lex) = fixture::grammar();
    let training = collect_goal_types(&full, &lex, &fixture::corpus(), Execution::Sequential);
    let (sub, report) = extract_subgrammar(&full, &training.goal, &ExtractOptions::default()).unwrap();
    (full, lex, training, sub, report)
}

#[test]
fn fixture_report() {
    let (_, _, training, sub, report) = trained_sub();
    assert!(training.failures.is_empty());
    assert_eq!(report.goal_types, 32);
    assert_eq!(report.kept_types, 27);
    assert_eq!(report.kept_systems, 11);
    assert_eq!(sub.systems().len(), 11);
    assert_eq!(
        report.excised_types,
        ids(&["indicative", "declarative", "attributive", "class_attribute", "nonwh_nominal"])
    );
    let raised: Vec<(&str, &str)> =
        report.raised_constraints.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    for pair in [
        ("indicative", "clause"),
        ("declarative", "clause"),
        ("attributive", "relational"),
        ("class_attribute", "relational"),
    ] {
        assert!(raised.contains(&pair), "{raised:?}");
    }
    assert_eq!(report.unreachable_systems, ["interrogative_type"]);
    assert!(validate_lattice(&sub).is_empty(), "{}", validate_lattice(&sub));
}

#[test]
fn collapsed_constraints_land_on_the_supertype() {
    let (_, _, _, sub, _) = trained_sub();
    let clause = sub.constraints_of(&TypeId::new("clause")).unwrap();
    let labels: BTreeSet<&str> = clause.labels().map(|l| l.as_str()).collect();
    for f in ["Subject", "Theme", "Process"] {
        assert!(labels.contains(f), "{labels:?}");
    }
    let relational = sub.constraints_of(&TypeId::new("relational")).unwrap();
    assert!(relational.labels().any(|l| l.as_str() == "Carrier"));
    assert!(relational.labels().any(|l| l.as_str() == "Attribute"));
}

#[test]
fn entries_are_rewritten() {
    let (_, _, _, sub, _) = trained_sub();
    // the conjunct naming the collapsed mood now names the clause
    let temporal = sub.system("temporal_type").unwrap();
    assert_eq!(temporal.entry, Dnf::from_conjuncts(vec![ids(&["material", "clause"])]));
    // the wh branch of the number system can no longer be entered
    let number = sub.system("number_type").unwrap();
    assert_eq!(number.entry, Dnf::from_conjuncts(vec![ids(&["class_name"])]));
}

#[test]
fn both_nominal_systems_are_visited() {
    let (_, _, _, sub, report) = trained_sub();
    // nominal_kind still branches; wh_type collapses to its single used output
    assert_eq!(sub.system("nominal_kind").unwrap().outputs, ids(&["class_name", "individual_name"]));
    assert!(sub.system("wh_type").is_none());
    assert!(report.excised_types.contains(&TypeId::new("nonwh_nominal")));
}

#[test]
fn unused_choices_are_out_of_bounds() {
    let (_, lex, _, sub, _) = trained_sub();
    let ood = &fixture::out_of_domain()[0];
    let err = generate_sentence(&sub, &lex, ood).unwrap_err();
    assert!(err.is_out_of_bounds(), "{err}");
}

#[test]
fn verify_counts_out_of_bounds() {
    let (full, lex, _, sub, _) = trained_sub();
    let mut corpus = fixture::corpus();
    corpus.extend(fixture::out_of_domain());
    let v = verify_consistency((&full, &lex), (&sub, &lex), &corpus, Execution::Sequential);
    assert_eq!(v.equal_count(), 50);
    assert_eq!(v.out_of_bounds_count(), 1);
    assert!(!v.all_equal());
    let last = v.sentences.last().unwrap();
    assert!(last.out_of_bounds && !last.equal);
}

#[test]
fn sequential_and_parallel_agree() {
    let (full, lex, _, sub, _) = trained_sub();
    let corpus = fixture::corpus();
    let a = verify_consistency((&full, &lex), (&sub, &lex), &corpus, Execution::Sequential);
    let b = verify_consistency((&full, &lex), (&sub, &lex), &corpus, Execution::Parallel);
    assert_eq!(a, b);
}

#[test]
fn sublexicon_drops_unused_closed_and_excised_open_items() {
    let (_, lex, training, sub, _) = trained_sub();
    let types: BTreeSet<TypeId> = sub.types().into_iter().collect();
    let usage = training.log.usage.clone();
    let sublex = extract_sublexicon(&lex, &types, &|id: &LexId| usage.contains(id));
    assert_eq!(sublex.len(), 78);
    for kept in ["a", "was", "at", "in", "nathan_drake", "painter"] {
        assert!(sublex.contains(kept), "{kept}");
    }
    assert!(!types.has(&TypeId::new("pronoun")));
    assert!(!sublex.contains("someone"));
}

#[test]
fn goal_validation() {
    let (full, _) = fixture::grammar();
    let no_root = GoalTypeSet::new(ids(&["clause"]));
    assert!(matches!(
        extract_subgrammar(&full, &no_root, &ExtractOptions::default()),
        Err(ExtractError::MissingRoot(_))
    ));
    let ghost = GoalTypeSet::new(ids(&["start", "ghost"]));
    assert!(matches!(
        extract_subgrammar(&full, &ghost, &ExtractOptions::default()),
        Err(ExtractError::UndefinedGoalType(_))
    ));
}

#[test]
fn pruned_choosers_drop_unasked_branches() {
    let (full, lex, training, sub, _) = trained_sub();
    let options = ExtractOptions { responses: Some(training.log.responses.clone()) };
    let (pruned, _) = extract_subgrammar(&full, &training.goal, &options).unwrap();
    let rank = |g: &TypeLattice| g.root_system().unwrap().chooser.clone().unwrap();
    assert!(rank(&pruned).paths().len() < rank(&sub).paths().len());
    assert!(validate_lattice(&pruned).is_empty(), "{}", validate_lattice(&pruned));
    let corpus = fixture::corpus();
    let v = verify_consistency((&full, &lex), (&pruned, &lex), &corpus, Execution::Parallel);
    assert!(v.all_equal());
}

#[test]
fn goal_types_without_their_supertypes_are_ignored() {
    let (full, _) = fixture::grammar();
    // declarative is listed but indicative is not, so nothing can select it
    let goal = GoalTypeSet::new(ids(&["start", "clause", "declarative", "material", "untimed"]));
    let (sub, report) = extract_subgrammar(&full, &goal, &ExtractOptions::default()).unwrap();
    assert!(validate_lattice(&sub).is_empty(), "{}", validate_lattice(&sub));
    assert!(sub.system("temporal_type").is_none());
    assert!(report.unreachable_systems.iter().any(|s| s == "temporal_type"));
    assert!(report.warnings.iter().any(|w| w.contains("goal type declarative")));
    assert_eq!(report.goal_types, 5);
}

#[test]
fn root_system_survives_with_one_output() {
    let (full, _) = fixture::grammar();
    let goal = GoalTypeSet::new(ids(&["start", "nominal_group", "class_name", "individual_name", "nonwh_nominal"]));
    let (sub, _) = extract_subgrammar(&full, &goal, &ExtractOptions::default()).unwrap();
    assert!(validate_lattice(&sub).is_empty(), "{}", validate_lattice(&sub));
    assert_eq!(sub.root_system().unwrap().outputs, ids(&["nominal_group"]));
}
