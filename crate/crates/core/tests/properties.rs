mod common;

use std::collections::{BTreeSet, HashSet};

use permlr::automaton::{build, perm_closure, BuildOptions, Collection, Construction, WorklistOrder};
use permlr::fixtures;
use permlr::grammar::{expand_grammar, expand_phrase, parse_grammar, Segment};
use permlr::items::{self, Dot, Item};
use permlr::oracle::{check_equivalence_with, EquivalenceOptions};
use permlr::runtime::{parse, ParseEvent, ParseTree};
use permlr::tables::{build_slr, FirstFollow};
use permlr::{build_modified, RuleId, Token};
use proptest::prelude::*;

use common::*;

fn grammar() -> impl Strategy<Value = permlr::Grammar> {
    any::<u64>().prop_map(|seed| random_cfgp(seed).1)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn step_preserves_rule_and_lookahead(g in grammar(), la in 0u32..4) {
        prop_assert_eq!(step_preserves_rule(&g), Ok(()));
        for i in all_items(&g) {
            let i = i.with_lookahead(Some(permlr::SymbolId(la)));
            for y in items::next(&g, i) {
                prop_assert_eq!(items::step(&g, i, y).unwrap().lookahead, i.lookahead);
            }
        }
    }

    #[test]
    fn paths_are_suffix_closed_subsets_of_expansions(g in grammar()) {
        prop_assert_eq!(paths_properties(&modified(&g)), Ok(()));
    }

    #[test]
    fn closure_is_idempotent(seed in any::<u64>(), pick in prop::collection::vec(any::<usize>(), 1..6)) {
        prop_assert_eq!(closure_idempotent(&random_cfgp(seed).1, &pick), Ok(()));
    }

    #[test]
    fn expansion_cardinality_holds(g in grammar()) {
        prop_assert_eq!(expansion_cardinality(&g), Ok(()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn render_round_trips(g in grammar()) {
        prop_assert_eq!(parse_grammar(&g.render()).unwrap(), g);
    }

    #[test]
    fn automaton_is_complete_and_consistent(g in grammar()) {
        let a = modified(&g);
        let ag = a.grammar();
        let err = a.error_state();
        for s in 0..a.len() {
            for y in ag.symbols().ids() {
                let t = a.transition(s, y);
                prop_assert!(t < a.len());
                if s == err {
                    prop_assert_eq!(t, err);
                }
            }
            if s != err {
                prop_assert_eq!(&perm_closure(ag, &a.kernel(s)), &a.state(s).items);
            }
        }
    }

    #[test]
    fn worklist_order_is_irrelevant(g in grammar(), seed in any::<u64>()) {
        let fifo = modified(&g);
        for order in [WorklistOrder::Lifo, WorklistOrder::Seeded(seed)] {
            let other = build(&g, Construction::Modified, Collection::Lr0, BuildOptions { order, ..Default::default() }).unwrap();
            prop_assert_eq!(other.states(), fifo.states());
            for s in 0..fifo.len() {
                prop_assert!(fifo.edges(s).eq(other.edges(s)));
            }
        }
    }

    #[test]
    fn first_agrees_with_expansion(g in grammar()) {
        let ff = FirstFollow::compute(&g);
        let ge = expand_grammar(&g);
        let tb = Textbook::compute(&ge);
        for r in g.rules() {
            let f = ff.first_phrase(r.rhs.segments());
            let mut union = BTreeSet::new();
            let mut nullable = false;
            for w in expand_phrase(&r.rhs) {
                let (t, null) = tb.first_of(&ge, &w);
                union.extend(t);
                nullable |= null;
            }
            prop_assert_eq!(&f.terminals, &union);
            prop_assert_eq!(f.nullable, nullable);
        }
        for n in g.nonterminals() {
            prop_assert_eq!(ff.follow(n), &tb.follow[&n]);
        }
    }

    #[test]
    fn sentences_parse_to_their_own_frontier(g in grammar(), seed in any::<u64>()) {
        let t = build_slr(modified(&g));
        prop_assume!(t.is_deterministic());
        let sentence = random_sentence(&g, seed, 6);
        let tokens: Vec<Token> = sentence
            .iter()
            .enumerate()
            .map(|(position, &terminal)| Token { terminal, lexeme: None, position })
            .collect();
        let r = parse(&t, &tokens).unwrap();
        prop_assert!(r.accepted);
        prop_assert_eq!(parse(&t, &tokens).unwrap(), r.clone());
        let tree = r.tree.unwrap();
        let frontier: Vec<_> = tree.frontier().into_iter().map(|t| t.terminal).collect();
        prop_assert_eq!(frontier, sentence);
        for e in &r.events {
            if let ParseEvent::Reduce { rule, children, .. } = e {
                prop_assert_eq!(*children, t.grammar().rule(*rule).pop_count());
            }
        }
        fn check(tree: &ParseTree) -> bool {
            match tree {
                ParseTree::Leaf(_) => true,
                ParseTree::Node { children, .. } => children.iter().all(check),
            }
        }
        prop_assert!(check(&tree));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn modified_and_standard_agree(g in grammar()) {
        let r = check_equivalence_with(&g, "generated", EquivalenceOptions { max_len: 5, ..Default::default() }).unwrap();
        prop_assert!(r.is_clean(), "{:?}\n{}", r.examples, g.render());
    }
}

#[test]
fn segment_items_form_a_subset_lattice() {
    for n in 1..=6 {
        let g = fixtures::flat_permutation(n);
        let start = Item::start(RuleId(1));
        let mut seen = HashSet::from([start]);
        let mut todo = vec![start];
        while let Some(i) = todo.pop() {
            for y in items::next(&g, i) {
                let j = items::step(&g, i, y).unwrap();
                if seen.insert(j) {
                    todo.push(j);
                }
            }
        }
        assert_eq!(seen.len(), 1 << n, "n = {n}");
        let inside = seen.iter().filter(|i| matches!(i.dot, Dot::Inside { .. })).count();
        assert_eq!(inside, (1 << n) - 2);
        let Segment::Permutation(p) = &g.rules()[0].rhs.segments()[0] else { panic!() };
        assert_eq!(p.len(), n);
    }
}

#[test]
fn permutation_reduce_pops_every_member_in_any_order() {
    let g = fixtures::abc();
    let t = build_slr(build_modified(&g).unwrap());
    for w in expand_phrase(&g.rules()[0].rhs) {
        let tokens: Vec<Token> = w.iter().enumerate().map(|(position, &terminal)| Token { terminal, lexeme: None, position }).collect();
        let r = parse(&t, &tokens).unwrap();
        assert!(r.accepted);
        assert!(r.events.contains(&ParseEvent::Reduce { rule: RuleId(1), lhs: g.start(), children: 3 }));
    }
}
