use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::HedgeAutomaton;
use crate::nfa::HorizontalNfa;
use crate::state::State;
use crate::tree::{Label, Tree};

/// Every tree of at most `max_nodes` nodes that evaluates to at least one
/// state, grouped by size, with the set of states it evaluates to.
pub struct Universe {
    layers: Vec<Vec<(Tree, BTreeSet<State>)>>,
}

impl Universe {
    pub fn build(a: &HedgeAutomaton, max_nodes: usize) -> Universe {
        let mut layers: Vec<Vec<(Tree, BTreeSet<State>)>> = vec![Vec::new()];
        let rules: Vec<(&Label, Vec<(&State, &HorizontalNfa)>)> = a
            .alphabet()
            .iter()
            .map(|l| (l, a.rules_for(l).collect::<Vec<_>>()))
            .filter(|(_, rs)| !rs.is_empty())
            .collect();
        for n in 1..=max_nodes {
            let mut layer: BTreeMap<Tree, BTreeSet<State>> = BTreeMap::new();
            for (label, rs) in &rules {
                let start: Vec<BTreeSet<usize>> = rs.iter().map(|(_, nfa)| nfa.start_set()).collect();
                let mut children = Vec::new();
                extend(&layers, rs, start, n - 1, &mut children, &mut |kids, config| {
                    let states: BTreeSet<State> = rs
                        .iter()
                        .zip(config)
                        .filter(|((_, nfa), cur)| cur.iter().any(|s| nfa.is_final(*s)))
                        .map(|((q, _), _)| (*q).clone())
                        .collect();
                    if !states.is_empty() {
                        layer.insert(Tree::new((*label).clone(), kids.to_vec()), states);
                    }
                });
            }
            layers.push(layer.into_iter().collect());
        }
        Universe { layers }
    }

    pub fn trees(&self) -> impl Iterator<Item = &(Tree, BTreeSet<State>)> {
        self.layers.iter().flatten()
    }

    pub fn evaluating_to<'a>(&'a self, q: &'a State) -> impl Iterator<Item = &'a Tree> + 'a {
        self.trees().filter(move |(_, s)| s.contains(q)).map(|(t, _)| t)
    }
}

// Extends the child hedge `kids` with trees whose sizes sum to `remaining`,
// tracking the per-rule horizontal state sets; dead branches are pruned.
fn extend(
    layers: &[Vec<(Tree, BTreeSet<State>)>],
    rules: &[(&State, &HorizontalNfa)],
    config: Vec<BTreeSet<usize>>,
    remaining: usize,
    kids: &mut Vec<Tree>,
    emit: &mut impl FnMut(&[Tree], &[BTreeSet<usize>]),
) {
    if remaining == 0 {
        emit(kids, &config);
        return;
    }
    for k in 1..=remaining {
        for (t, states) in &layers[k] {
            let next: Vec<BTreeSet<usize>> = rules
                .iter()
                .zip(&config)
                .map(|((_, nfa), cur)| {
                    if cur.is_empty() {
                        BTreeSet::new()
                    } else {
                        nfa.step(cur, |x| states.contains(x))
                    }
                })
                .collect();
            if next.iter().all(BTreeSet::is_empty) {
                continue;
            }
            kids.push(t.clone());
            extend(layers, rules, next, remaining - k, kids, emit);
            kids.pop();
        }
    }
}

/// `{ t ∈ L(a) : |t| ≤ max_nodes }`.
pub fn enumerate(a: &HedgeAutomaton, max_nodes: usize) -> BTreeSet<Tree> {
    Universe::build(a, max_nodes)
        .trees()
        .filter(|(_, s)| s.iter().any(|q| a.finals().contains(q)))
        .map(|(t, _)| t.clone())
        .collect()
}

/// Trees of at most `max_nodes` nodes that evaluate to `q`.
pub fn enumerate_state(a: &HedgeAutomaton, q: &State, max_nodes: usize) -> BTreeSet<Tree> {
    Universe::build(a, max_nodes).evaluating_to(q).cloned().collect()
}
