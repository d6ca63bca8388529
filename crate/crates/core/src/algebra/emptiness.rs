use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automaton::HedgeAutomaton;
use crate::nfa::HorizontalNfa;
use crate::state::State;
use crate::tree::{Label, Tree};

/// Smallest number of nodes of a tree evaluating to each productive state.
pub fn minimal_sizes(a: &HedgeAutomaton) -> HashMap<State, usize> {
    let mut size: HashMap<State, usize> = HashMap::new();
    loop {
        let mut changed = false;
        for (_, q, nfa) in a.rules() {
            if let Some(d) = nfa.shortest_path(|x| size.get(x).copied()) {
                if size.get(q).is_none_or(|&old| d + 1 < old) {
                    size.insert(q.clone(), d + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            return size;
        }
    }
}

pub fn productive_states(a: &HedgeAutomaton) -> BTreeSet<State> {
    minimal_sizes(a).into_keys().collect()
}

/// For every productive state, the tree of least size evaluating to it,
/// ties broken by the lexicographically least preorder label sequence.
pub fn minimal_trees(a: &HedgeAutomaton) -> BTreeMap<State, Tree> {
    minimal_witnesses(a)
        .into_iter()
        .map(|(q, w)| (q, w.tree))
        .collect()
}

struct Witness {
    preorder: Vec<Label>,
    tree: Tree,
}

fn minimal_witnesses(a: &HedgeAutomaton) -> BTreeMap<State, Witness> {
    let size = minimal_sizes(a);
    let mut by_size: Vec<(&State, usize)> = size.iter().map(|(q, m)| (q, *m)).collect();
    by_size.sort_by(|x, y| x.1.cmp(&y.1).then_with(|| x.0.cmp(y.0)));
    let mut done: BTreeMap<State, Witness> = BTreeMap::new();
    for (q, m) in by_size {
        let mut best: Option<(Vec<Label>, Label, Vec<State>)> = None;
        for label in a.alphabet() {
            let Some(nfa) = a.rule(label, q) else { continue };
            let Some((suffix, word)) = best_word(nfa, m - 1, &size, &done) else {
                continue;
            };
            let mut preorder = Vec::with_capacity(m);
            preorder.push(label.clone());
            preorder.extend(suffix);
            if best.as_ref().is_none_or(|(b, _, _)| preorder < *b) {
                best = Some((preorder, label.clone(), word));
            }
        }
        let (preorder, label, word) = best.expect("a state of finite minimal size has a tight rule");
        let children = word.iter().map(|x| done[x].tree.clone()).collect();
        done.insert(
            q.clone(),
            Witness {
                preorder,
                tree: Tree::new(label, children),
            },
        );
    }
    done
}

// Lexicographically least concatenation of child witnesses along accepting
// paths of total weight `budget`, or `None` if no path is that light.
fn best_word(
    nfa: &HorizontalNfa,
    budget: usize,
    size: &HashMap<State, usize>,
    done: &BTreeMap<State, Witness>,
) -> Option<(Vec<Label>, Vec<State>)> {
    let weight = |x: &State| size.get(x).copied();
    let to_final = nfa.distances_to_final(&weight);
    if to_final[nfa.initial()] != Some(budget) {
        return None;
    }
    let mut memo: HashMap<usize, (Vec<Label>, Vec<State>)> = HashMap::new();
    Some(suffix(nfa, nfa.initial(), &to_final, size, done, &mut memo))
}

fn suffix(
    nfa: &HorizontalNfa,
    s: usize,
    to_final: &[Option<usize>],
    size: &HashMap<State, usize>,
    done: &BTreeMap<State, Witness>,
    memo: &mut HashMap<usize, (Vec<Label>, Vec<State>)>,
) -> (Vec<Label>, Vec<State>) {
    if let Some(r) = memo.get(&s) {
        return r.clone();
    }
    let here = to_final[s].expect("suffix is only asked on tight states");
    let mut best: Option<(Vec<Label>, Vec<State>)> = None;
    if here == 0 && nfa.is_final(s) {
        best = Some((Vec::new(), Vec::new()));
    } else {
        for (sym, t) in nfa.edges(s) {
            let Some(x) = sym else { continue };
            let (Some(mx), Some(rest)) = (size.get(x), to_final[*t]) else {
                continue;
            };
            if mx + rest != here {
                continue;
            }
            let (tail, tail_word) = suffix(nfa, *t, to_final, size, done, memo);
            let mut labels = done[x].preorder.clone();
            labels.extend(tail);
            if best.as_ref().is_none_or(|(b, _)| labels < *b) {
                let mut word = vec![x.clone()];
                word.extend(tail_word);
                best = Some((labels, word));
            }
        }
    }
    let best = best.expect("a tight state has a tight continuation");
    memo.insert(s, best.clone());
    best
}

/// `None` iff the language is empty; otherwise an accepted tree of least
/// size, ties broken by the least preorder label sequence.
pub fn is_empty(a: &HedgeAutomaton) -> Option<Tree> {
    let witnesses = minimal_witnesses(a);
    a.finals()
        .iter()
        .filter_map(|q| witnesses.get(q))
        .min_by(|x, y| {
            x.preorder
                .len()
                .cmp(&y.preorder.len())
                .then_with(|| x.preorder.cmp(&y.preorder))
        })
        .map(|w| w.tree.clone())
}
