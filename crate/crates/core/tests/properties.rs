mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::subsequence;

use subgrammar::notation::{format_system, parse_systems};
use subgrammar::*;

use common::*;

fn fixture_types() -> Vec<TypeId> {
    let (full, _) = fixture::grammar();
    full.types().into_iter().filter(|t| t.as_str() != ROOT_TYPE).collect()
}

proptest! {
    #[test]
    fn normalization_is_idempotent(e in entry_strategy(8)) {
        let once = normalize_entry(&e);
        prop_assert_eq!(normalize_entry(&once), once.clone());
        prop_assert_eq!(Dnf::from_expr(&once), Dnf::from_expr(&e));
    }

    #[test]
    fn substitution_renames_the_atom(e in entry_strategy(6), mask in 0u32..64, sup in 0usize..6, t in 0usize..6) {
        let dnf = Dnf::from_expr(&e);
        let (sup, t) = (TypeId::new(&format!("t{sup}")), TypeId::new(&format!("t{t}")));
        prop_assume!(sup != t);
        let out = dnf_substitute(&sup, &t, &dnf);
        prop_assert!(!out.contains(&t));
        let mut s: BTreeSet<TypeId> = (0..6).filter(|i| mask & (1 << i) != 0).map(|i| TypeId::new(&format!("t{i}"))).collect();
        s.remove(&t);
        let mut widened = s.clone();
        if s.contains(&sup) {
            widened.insert(t.clone());
        }
        prop_assert_eq!(entry_satisfied(&out, &s), entry_satisfied(&dnf, &widened));
    }

    #[test]
    fn notation_round_trips(e in entry_strategy(6), n in 2usize..5) {
        let outputs = (0..n).map(|i| TypeId::new(&format!("o{i}"))).collect();
        let s = System::new("sys", Dnf::from_expr(&e), outputs);
        let again = parse_systems(&format_system(&s)).unwrap();
        prop_assert_eq!(again, vec![s]);
    }

    #[test]
    fn unification_is_idempotent(a in constraint_strategy()) {
        prop_assume!(well_formed(&a));
        prop_assert_eq!(unify_constraints(&a, &a, &sibling_index()), Ok(a));
    }

    #[test]
    fn unification_keeps_both_sides(a in constraint_strategy(), b in constraint_strategy()) {
        if let Ok(u) = unify_constraints(&a, &b, &sibling_index()) {
            for (label, fillers) in a.insertions.iter().chain(b.insertions.iter()) {
                let merged = &u.insertions[label];
                prop_assert!(fillers.iter().all(|f| merged.contains(f)));
            }
            prop_assert!(u.violations(&sibling_index()).is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn any_goal_yields_a_valid_consistent_subgrammar(picked in subsequence(fixture_types(), 0..=41)) {
        let (full, _) = fixture::grammar();
        let mut types = picked;
        types.push(TypeId::new(ROOT_TYPE));
        let goal = GoalTypeSet::new(types);
        let (sub, report) = extract_subgrammar(&full, &goal, &ExtractOptions::default()).unwrap();
        prop_assert!(validate_lattice(&sub).is_empty(), "{}", validate_lattice(&sub));
        let kept: BTreeSet<TypeId> = sub.types().into_iter().collect();
        prop_assert!(kept.is_subset(&goal.types));
        for t in &report.excised_types {
            prop_assert!(!kept.contains(t));
        }

        // the sub's selections are the goal-restricted selections of the full
        // grammar with the pseudotypes projected away
        let pseudo: BTreeSet<TypeId> = report.excised_types.iter().cloned().collect();
        let restricted = maximal_selections(&full, Some(&goal.types));
        let projected: BTreeSet<Selection> =
            restricted.iter().map(|s| s.difference(&pseudo).cloned().collect()).collect();
        prop_assert_eq!(&projected, &maximal_selections(&sub, None));
        prop_assert_eq!(&kept, &expected_sub_types(&full, &restricted));

        let (again, second) = extract_subgrammar(&sub, &GoalTypeSet::all_of(&sub), &ExtractOptions::default()).unwrap();
        prop_assert!(second.excised_types.is_empty());
        prop_assert_eq!(again.types(), sub.types());
    }

    #[test]
    fn corpus_order_does_not_change_the_goal(order in Just((0..50).collect::<Vec<usize>>()).prop_shuffle()) {
        let (full, lex) = fixture::grammar();
        let corpus = fixture::corpus();
        let shuffled: Vec<SemanticSpec> = order.iter().map(|&i| corpus[i].clone()).collect();
        let t = collect_goal_types(&full, &lex, &shuffled, Execution::Sequential);
        prop_assert!(t.series.is_monotone());
        prop_assert_eq!(t.series.final_count(), 32);
        let prefix = collect_goal_types(&full, &lex, &shuffled[..25], Execution::Sequential);
        prop_assert!(prefix.goal.types.is_subset(&t.goal.types));
    }
}
