//! Nondeterministic finite hedge automata.
//!
//! A rule `a(B) → q` lets a node labelled `a` evaluate to `q` when the word
//! of its children's states is accepted by the horizontal automaton `B`.
//! Automata are kept normalized: at most one rule per `(a, q)`, rules with
//! an empty horizontal language are absent, and horizontal automata are
//! ε-free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::nfa::HorizontalNfa;
pub use crate::state::{FreshNames, State};
use crate::tree::{Label, Position, Tree};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HedgeAutomaton {
    name: String,
    alphabet: BTreeSet<Label>,
    states: BTreeSet<State>,
    finals: BTreeSet<State>,
    rules: BTreeMap<Label, BTreeMap<State, HorizontalNfa>>,
}

impl Default for HedgeAutomaton {
    fn default() -> Self {
        HedgeAutomaton::new("A")
    }
}

impl HedgeAutomaton {
    pub fn new(name: impl Into<String>) -> Self {
        HedgeAutomaton {
            name: name.into(),
            alphabet: BTreeSet::new(),
            states: BTreeSet::new(),
            finals: BTreeSet::new(),
            rules: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        &self.alphabet
    }

    pub fn states(&self) -> &BTreeSet<State> {
        &self.states
    }

    pub fn finals(&self) -> &BTreeSet<State> {
        &self.finals
    }

    pub fn add_label(&mut self, a: Label) {
        self.alphabet.insert(a);
    }

    pub fn add_state(&mut self, q: State) {
        self.states.insert(q);
    }

    pub fn add_final(&mut self, q: State) {
        self.states.insert(q.clone());
        self.finals.insert(q);
    }

    pub fn remove_final(&mut self, q: &State) {
        self.finals.remove(q);
    }

    /// Adds `a(nfa) → q`, merging by union with an existing `(a, q)` rule.
    /// The stored automaton is ε-free and trimmed; an empty language leaves
    /// no rule behind.
    pub fn add_rule(&mut self, a: Label, q: State, nfa: HorizontalNfa) {
        self.alphabet.insert(a.clone());
        self.states.insert(q.clone());
        let merged = match self.rules.get(&a).and_then(|m| m.get(&q)) {
            Some(old) => old.union(&nfa),
            None => nfa,
        };
        self.set_rule(a, q, merged);
    }

    /// Sets `a(nfa) → q`, replacing any existing rule for `(a, q)`.
    pub fn set_rule(&mut self, a: Label, q: State, nfa: HorizontalNfa) {
        self.alphabet.insert(a.clone());
        self.states.insert(q.clone());
        let nfa = nfa.epsilon_eliminate();
        if nfa.is_empty() {
            self.remove_rule(&a, &q);
            return;
        }
        self.rules.entry(a).or_default().insert(q, nfa);
    }

    pub fn remove_rule(&mut self, a: &Label, q: &State) -> Option<HorizontalNfa> {
        let by_state = self.rules.get_mut(a)?;
        let removed = by_state.remove(q);
        if by_state.is_empty() {
            self.rules.remove(a);
        }
        removed
    }

    pub fn rule(&self, a: &Label, q: &State) -> Option<&HorizontalNfa> {
        self.rules.get(a)?.get(q)
    }

    /// Rules for label `a`, keyed by target state.
    pub fn rules_for(&self, a: &Label) -> impl Iterator<Item = (&State, &HorizontalNfa)> {
        self.rules.get(a).into_iter().flat_map(|m| m.iter())
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Label, &State, &HorizontalNfa)> {
        self.rules
            .iter()
            .flat_map(|(a, m)| m.iter().map(move |(q, nfa)| (a, q, nfa)))
    }

    pub fn num_rules(&self) -> usize {
        self.rules.values().map(BTreeMap::len).sum()
    }

    /// Total number of horizontal transitions.
    pub fn num_transitions(&self) -> usize {
        self.rules().map(|(_, _, nfa)| nfa.num_transitions()).sum()
    }

    /// Labels with a rule producing `q`.
    pub fn producers(&self, q: &State) -> Vec<&Label> {
        self.rules
            .iter()
            .filter(|(_, m)| m.contains_key(q))
            .map(|(a, _)| a)
            .collect()
    }

    /// Applies `f` to every horizontal automaton.
    pub(crate) fn map_rules(&mut self, mut f: impl FnMut(&Label, &State, &HorizontalNfa) -> HorizontalNfa) {
        let old = std::mem::take(&mut self.rules);
        for (a, m) in old {
            for (q, nfa) in m {
                let new = f(&a, &q, &nfa);
                self.set_rule(a.clone(), q, new);
            }
        }
    }

    /// Renames states through `map` (identity elsewhere), both as rule
    /// targets and as horizontal symbols. `map` must be injective on the
    /// states it touches.
    pub fn rename_states(&self, map: &BTreeMap<State, State>) -> HedgeAutomaton {
        let r = |q: &State| map.get(q).cloned().unwrap_or_else(|| q.clone());
        let mut out = HedgeAutomaton::new(self.name.clone());
        out.alphabet = self.alphabet.clone();
        out.states = self.states.iter().map(r).collect();
        out.finals = self.finals.iter().map(r).collect();
        for (a, q, nfa) in self.rules() {
            out.rules
                .entry(a.clone())
                .or_default()
                .insert(r(q), nfa.rename_symbols(map));
        }
        out
    }

    /// Per-node sets of states the subtree can evaluate to, bottom-up.
    pub fn evaluate(&self, t: &Tree) -> StateSets {
        let children: Vec<StateSets> = t.children().iter().map(|c| self.evaluate(c)).collect();
        let mut states = BTreeSet::new();
        if let Some(by_state) = self.rules.get(t.label()) {
            for (q, nfa) in by_state {
                if nfa.accepts_some(children.iter().map(|c| &c.states)) {
                    states.insert(q.clone());
                }
            }
        }
        StateSets { states, children }
    }

    /// Some accepting computation over `t`, if `t` is accepted.
    pub fn run(&self, t: &Tree) -> Option<Computation> {
        let sets = self.evaluate(t);
        let root = sets.states.iter().find(|q| self.finals.contains(*q))?.clone();
        Some(self.extract(t, &sets, root))
    }

    fn extract(&self, t: &Tree, sets: &StateSets, q: State) -> Computation {
        let nfa = self
            .rule(t.label(), &q)
            .expect("state chosen from the admissible set has a rule");
        let word = choose_word(nfa, sets.children.iter().map(|c| &c.states).collect())
            .expect("admissible state has a witnessing child word");
        let children = t
            .children()
            .iter()
            .zip(&sets.children)
            .zip(word)
            .map(|((child, child_sets), s)| self.extract(child, child_sets, s))
            .collect();
        Computation { state: q, children }
    }

    pub fn accepts(&self, t: &Tree) -> bool {
        self.evaluate(t).states.iter().any(|q| self.finals.contains(q))
    }

    /// Checks that a computation is locally valid and accepting.
    pub fn is_accepting_computation(&self, t: &Tree, c: &Computation) -> bool {
        self.finals.contains(&c.state) && self.is_valid_computation(t, c)
    }

    pub fn is_valid_computation(&self, t: &Tree, c: &Computation) -> bool {
        if t.children().len() != c.children.len() {
            return false;
        }
        let word: Vec<State> = c.children.iter().map(|k| k.state.clone()).collect();
        let local = self
            .rule(t.label(), &c.state)
            .is_some_and(|nfa| nfa.accepts_unchecked(&word));
        local
            && t.children()
                .iter()
                .zip(&c.children)
                .all(|(tc, cc)| self.is_valid_computation(tc, cc))
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn check_invariants(&self, companion: Option<&HedgeAutomaton>) -> Result<(), String> {
        if !self.finals.is_subset(&self.states) {
            return Err("final states outside the state set".into());
        }
        for (a, q, nfa) in self.rules() {
            if !self.alphabet.contains(a) {
                return Err(format!("rule label {a} outside the alphabet"));
            }
            if !self.states.contains(q) {
                return Err(format!("rule target {q} undeclared"));
            }
            if nfa.has_epsilon() {
                return Err(format!("rule {a} -> {q} has ε-moves"));
            }
            if nfa.is_empty() {
                return Err(format!("rule {a} -> {q} has an empty language"));
            }
            for s in nfa.used_symbols() {
                let known = self.states.contains(&s)
                    || companion.is_some_and(|c| c.states.contains(&s));
                if !known {
                    return Err(format!("rule {a} -> {q} reads unknown state {s}"));
                }
            }
        }
        Ok(())
    }
}

/// Builds a normalized automaton from a multiset of rules: duplicate
/// `(a, q)` keys are merged by union of their horizontal languages.
pub fn normalize(
    name: impl Into<String>,
    rules: impl IntoIterator<Item = (Label, HorizontalNfa, State)>,
    finals: impl IntoIterator<Item = State>,
) -> HedgeAutomaton {
    let mut out = HedgeAutomaton::new(name);
    for (a, nfa, q) in rules {
        for s in nfa.used_symbols() {
            out.add_state(s);
        }
        out.add_rule(a, q, nfa);
    }
    for q in finals {
        out.add_final(q);
    }
    out
}

/// Renames the states of `a` that collide with `reserved` so the state sets
/// become disjoint. Untouched states keep their names.
pub fn state_hygiene(a: &HedgeAutomaton, reserved: &BTreeSet<State>) -> (HedgeAutomaton, BTreeMap<State, State>) {
    let mut fresh = FreshNames::new(a.states.iter().chain(reserved).cloned());
    let map: BTreeMap<State, State> = a
        .states
        .iter()
        .filter(|q| reserved.contains(*q))
        .map(|q| (q.clone(), fresh.fresh(q)))
        .collect();
    if map.is_empty() {
        return (a.clone(), map);
    }
    (a.rename_states(&map), map)
}

// A word x_1..x_n accepted by `nfa` with x_i ∈ choices[i]. `nfa` is ε-free.
fn choose_word(nfa: &HorizontalNfa, choices: Vec<&BTreeSet<State>>) -> Option<Vec<State>> {
    let mut layers = vec![BTreeSet::from([nfa.initial()])];
    for set in &choices {
        let next = nfa.step(layers.last().unwrap(), |x| set.contains(x));
        layers.push(next);
    }
    let mut cur = *layers.last()?.iter().find(|s| nfa.is_final(**s))?;
    let mut word = Vec::with_capacity(choices.len());
    for i in (0..choices.len()).rev() {
        let (prev, sym) = layers[i].iter().find_map(|&s| {
            nfa.edges(s).iter().find_map(|(sym, t)| match sym {
                Some(x) if *t == cur && choices[i].contains(x) => Some((s, x.clone())),
                _ => None,
            })
        })?;
        word.push(sym);
        cur = prev;
    }
    word.reverse();
    Some(word)
}

/// The sets of states each node of a tree can evaluate to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSets {
    pub states: BTreeSet<State>,
    pub children: Vec<StateSets>,
}

/// A tree of states with the shape of the evaluated tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computation {
    pub state: State,
    pub children: Vec<Computation>,
}

impl Computation {
    pub fn state_at(&self, p: &Position) -> Option<&State> {
        let mut node = self;
        for &i in p.path() {
            node = node.children.get(i.checked_sub(1)?)?;
        }
        Some(&node.state)
    }

    /// `(position, state)` pairs in preorder.
    pub fn assignments(&self) -> Vec<(Position, State)> {
        let mut out = Vec::new();
        self.collect(Position::root(), &mut out);
        out
    }

    fn collect(&self, p: Position, out: &mut Vec<(Position, State)>) {
        out.push((p.clone(), self.state.clone()));
        for (i, c) in self.children.iter().enumerate() {
            c.collect(p.child(i + 1), out);
        }
    }
}

impl fmt::Display for Computation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.state)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}
