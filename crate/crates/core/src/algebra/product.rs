use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automaton::HedgeAutomaton;
use crate::nfa::HorizontalNfa;
use crate::state::State;
use crate::tree::Label;

/// Accepts `L(a) ∪ L(b)`. States are prefixed with `L.` and `R.` to keep
/// the two sides apart.
pub fn union(a: &HedgeAutomaton, b: &HedgeAutomaton) -> HedgeAutomaton {
    let mut out = HedgeAutomaton::new(format!("{}|{}", a.name(), b.name()));
    for (side, prefix) in [(a, "L."), (b, "R.")] {
        let map: BTreeMap<State, State> = side
            .states()
            .iter()
            .map(|q| (q.clone(), State::from(format!("{prefix}{q}"))))
            .collect();
        let renamed = side.rename_states(&map);
        for l in renamed.alphabet() {
            out.add_label(l.clone());
        }
        for q in renamed.states() {
            out.add_state(q.clone());
        }
        for q in renamed.finals() {
            out.add_final(q.clone());
        }
        for (l, q, nfa) in renamed.rules() {
            out.set_rule(l.clone(), q.clone(), nfa.clone());
        }
    }
    out
}

/// Product automaton for `L(a) ∩ L(b)`, restricted to pairs of states that
/// can both be reached by a common tree.
pub fn intersect(a: &HedgeAutomaton, b: &HedgeAutomaton) -> HedgeAutomaton {
    intersect_with_pairs(a, b).0
}

/// As [`intersect`], also returning the pair each product state stands for.
pub fn intersect_with_pairs(a: &HedgeAutomaton, b: &HedgeAutomaton) -> (HedgeAutomaton, BTreeMap<State, (State, State)>) {
    let labels: Vec<&Label> = a.alphabet().intersection(b.alphabet()).collect();
    let mut pairs: HashMap<(State, State), State> = HashMap::new();
    let mut order: Vec<(State, State)> = Vec::new();
    let mut changed = true;
    while changed {
        changed = false;
        for label in &labels {
            for (qa, na) in a.rules_for(label) {
                for (qb, nb) in b.rules_for(label) {
                    let key = (qa.clone(), qb.clone());
                    if pairs.contains_key(&key) {
                        continue;
                    }
                    if !product_nfa(na, nb, &pairs).is_empty() {
                        let name = State::from(format!("x{}", order.len()));
                        pairs.insert(key.clone(), name);
                        order.push(key);
                        changed = true;
                    }
                }
            }
        }
    }
    let mut out = HedgeAutomaton::new(format!("{}&{}", a.name(), b.name()));
    for label in &labels {
        out.add_label((*label).clone());
    }
    for key in &order {
        let name = pairs[key].clone();
        if a.finals().contains(&key.0) && b.finals().contains(&key.1) {
            out.add_final(name);
        } else {
            out.add_state(name);
        }
    }
    for label in &labels {
        for (qa, na) in a.rules_for(label) {
            for (qb, nb) in b.rules_for(label) {
                if let Some(name) = pairs.get(&(qa.clone(), qb.clone())) {
                    out.set_rule((*label).clone(), name.clone(), product_nfa(na, nb, &pairs));
                }
            }
        }
    }
    let origin = order.into_iter().map(|key| (pairs[&key].clone(), key)).collect();
    (out, origin)
}

// Synchronous product of two ε-free horizontal automata, reading the pair
// names in `pairs`. Only the reachable part is built.
fn product_nfa(na: &HorizontalNfa, nb: &HorizontalNfa, pairs: &HashMap<(State, State), State>) -> HorizontalNfa {
    debug_assert!(!na.has_epsilon() && !nb.has_epsilon());
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let start = (na.initial(), nb.initial());
    index.insert(start, 0);
    queue.push_back(start);
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    while let Some((s, t)) = queue.pop_front() {
        let id = index[&(s, t)];
        if na.is_final(s) && nb.is_final(t) {
            finals.push(id);
        }
        for (xa, s2) in na.edges(s) {
            let Some(xa) = xa else { continue };
            for (xb, t2) in nb.edges(t) {
                let Some(xb) = xb else { continue };
                let Some(name) = pairs.get(&(xa.clone(), xb.clone())) else {
                    continue;
                };
                let next = (*s2, *t2);
                let n = index.len();
                let target = *index.entry(next).or_insert_with(|| {
                    queue.push_back(next);
                    n
                });
                transitions.push((id, Some(name.clone()), target));
            }
        }
    }
    let alphabet: BTreeSet<State> = pairs.values().cloned().collect();
    HorizontalNfa::from_parts(alphabet, index.len(), 0, finals, transitions)
}
