//! Shared inputs for the benchmarks.

use hasa_core::testkit::{self, labels, random_automaton, rng, AutomatonShape};
use hasa_core::{HedgeAutomaton, UpdateScript};

/// Source schema, target schema and migration script at XMark scale.
pub fn xmark() -> (HedgeAutomaton, HedgeAutomaton, UpdateScript) {
    (testkit::xmark(), testkit::xmark_evolved(), testkit::xmark_script())
}

/// Pairs of random automata over three labels with `states` states each.
pub fn random_pairs(count: u64, states: usize) -> Vec<(HedgeAutomaton, HedgeAutomaton)> {
    let sigma = labels(&["a", "b", "c"]);
    (0..count)
        .map(|seed| {
            let mut r = rng(seed);
            let a = random_automaton(&mut r, &AutomatonShape::new(sigma.clone(), states, 3));
            let b = random_automaton(&mut r, &AutomatonShape::new(sigma.clone(), states, 3).prefix("r"));
            (a, b)
        })
        .collect()
}
