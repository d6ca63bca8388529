use std::collections::BTreeSet;

use hasa_core::algebra::{
    complement, determinize, enumerate, equivalent, included, intersect, is_empty, minimal_sizes, union, Limits,
};
use hasa_core::testkit::{all_trees, labels, random_automaton, rng, AutomatonShape};
use hasa_core::{HedgeAutomaton, Label, State, Tree};

// Independent membership: a node's states are those q for which some
// choice of child states spells a word of B_{a,q}.
fn states_of(a: &HedgeAutomaton, t: &Tree) -> BTreeSet<State> {
    let kids: Vec<Vec<State>> = t.children().iter().map(|c| states_of(a, c).into_iter().collect()).collect();
    let mut words: Vec<Vec<State>> = vec![Vec::new()];
    for k in &kids {
        words = words
            .iter()
            .flat_map(|w| {
                k.iter().map(move |s| {
                    let mut w = w.clone();
                    w.push(s.clone());
                    w
                })
            })
            .collect();
    }
    a.rules_for(t.label())
        .filter(|(_, nfa)| words.iter().any(|w| nfa.accepts(w).unwrap_or(false)))
        .map(|(q, _)| q.clone())
        .collect()
}

fn member(a: &HedgeAutomaton, t: &Tree) -> bool {
    states_of(a, t).iter().any(|q| a.finals().contains(q))
}

fn cases(n: u64, alphabet: &[Label]) -> Vec<HedgeAutomaton> {
    (0..n)
        .map(|seed| {
            let mut r = rng(seed);
            let shape = AutomatonShape::new(alphabet.to_vec(), 2 + (seed % 2) as usize, 2);
            random_automaton(&mut r, &shape)
        })
        .collect()
}

#[test]
fn accepts_matches_definition() {
    let sigma = labels(&["a", "b"]);
    let trees = all_trees(&sigma, 5);
    for a in cases(20, &sigma) {
        for t in &trees {
            assert_eq!(a.accepts(t), member(&a, t), "{t}");
        }
    }
}

#[test]
fn boolean_operations_on_small_trees() {
    let sigma_labels = labels(&["a", "b"]);
    let sigma: BTreeSet<Label> = sigma_labels.iter().cloned().collect();
    let trees = all_trees(&sigma_labels, 5);
    let autos = cases(24, &sigma_labels);
    for pair in autos.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let not_a = complement(a, &sigma).unwrap();
        let both = intersect(a, b);
        let either = union(a, b);
        for t in &trees {
            let (x, y) = (member(a, t), member(b, t));
            assert_eq!(not_a.accepts(t), !x, "complement on {t}");
            assert_eq!(both.accepts(t), x && y, "intersection on {t}");
            assert_eq!(either.accepts(t), x || y, "union on {t}");
        }
        let verdict = included(a, b).unwrap();
        match verdict.counterexample {
            Some(w) => {
                assert!(!verdict.holds);
                assert!(member(a, &w) && !member(b, &w), "{w}");
            }
            None => {
                assert!(verdict.holds);
                assert!(trees.iter().all(|t| !member(a, t) || member(b, t)));
            }
        }
    }
}

#[test]
fn determinization_preserves_language() {
    let sigma = labels(&["a", "b"]);
    let trees = all_trees(&sigma, 5);
    for a in cases(20, &sigma) {
        let d = determinize(&a).unwrap();
        for t in &trees {
            assert_eq!(d.automaton.accepts(t), a.accepts(t));
            // Subset states: exactly one per tree.
            assert_eq!(d.automaton.evaluate(t).states.len(), 1);
        }
    }
}

#[test]
fn emptiness_witness_is_smallest() {
    let sigma = labels(&["a", "b"]);
    let trees = all_trees(&sigma, 5);
    for a in cases(30, &sigma) {
        let smallest = trees.iter().find(|t| member(&a, t));
        match (is_empty(&a), smallest) {
            (Some(w), Some(s)) => {
                assert!(member(&a, &w));
                assert_eq!(w.size(), s.size());
            }
            (Some(w), None) => {
                assert!(member(&a, &w));
                assert!(w.size() > 5);
            }
            (None, s) => assert!(s.is_none()),
        }
        let sizes = minimal_sizes(&a);
        for (q, n) in sizes {
            let first = trees.iter().find(|t| states_of(&a, t).contains(&q));
            if let Some(t) = first {
                assert_eq!(t.size(), n, "minimal size of {q}");
            } else {
                assert!(n > 5);
            }
        }
    }
}

#[test]
fn enumeration_is_the_bounded_language() {
    let sigma = labels(&["a", "b"]);
    let trees = all_trees(&sigma, 5);
    for a in cases(20, &sigma) {
        let expected: BTreeSet<Tree> = trees.iter().filter(|t| member(&a, t)).cloned().collect();
        assert_eq!(enumerate(&a, 5), expected);
    }
}

#[test]
fn equivalence_after_reversible_edits() {
    let sigma = labels(&["a", "b"]);
    for a in cases(10, &sigma) {
        let d = determinize(&a).unwrap().automaton;
        assert!(equivalent(&a, &d).unwrap());
    }
}

#[test]
fn state_budget_is_enforced() {
    let sigma: BTreeSet<Label> = labels(&["a", "b"]).into_iter().collect();
    let a = cases(1, &labels(&["a", "b"])).remove(0);
    let err = hasa_core::algebra::complement_with(&a, &sigma, &Limits::with_budget(1)).unwrap_err();
    assert!(matches!(err, hasa_core::Error::StateBudgetExceeded { budget: 1 }));
}
