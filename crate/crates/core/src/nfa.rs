//! Horizontal automata: finite word automata whose symbols are vertical
//! states of a hedge automaton.
//!
//! Internal states are dense indices. A transition symbol of `None` is an
//! ε-move. Constructions that introduce ε-moves leave them in place; callers
//! that need ε-free automata run [`HorizontalNfa::epsilon_eliminate`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::state::State;

pub type Symbol = Option<State>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorizontalNfa {
    alphabet: BTreeSet<State>,
    initial: usize,
    finals: BTreeSet<usize>,
    edges: Vec<Vec<(Symbol, usize)>>,
}

impl Default for HorizontalNfa {
    fn default() -> Self {
        HorizontalNfa::new()
    }
}

impl HorizontalNfa {
    /// One non-final initial state, no transitions: the empty language.
    pub fn new() -> Self {
        HorizontalNfa {
            alphabet: BTreeSet::new(),
            initial: 0,
            finals: BTreeSet::new(),
            edges: vec![Vec::new()],
        }
    }

    /// The language {ε}.
    pub fn epsilon() -> Self {
        let mut nfa = HorizontalNfa::new();
        nfa.finals.insert(0);
        nfa
    }

    /// The singleton language {w}.
    pub fn word(w: &[State]) -> Self {
        let mut nfa = HorizontalNfa::new();
        let mut cur = 0;
        for s in w {
            let next = nfa.add_state();
            nfa.add_transition(cur, Some(s.clone()), next);
            cur = next;
        }
        nfa.finals.insert(cur);
        nfa
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals.contains(&s)
    }

    pub fn alphabet(&self) -> &BTreeSet<State> {
        &self.alphabet
    }

    pub fn add_state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    pub fn set_initial(&mut self, s: usize) {
        assert!(s < self.edges.len());
        self.initial = s;
    }

    pub fn add_final(&mut self, s: usize) {
        assert!(s < self.edges.len());
        self.finals.insert(s);
    }

    pub fn set_finals(&mut self, finals: impl IntoIterator<Item = usize>) {
        self.finals = finals.into_iter().collect();
        assert!(self.finals.iter().all(|&f| f < self.edges.len()));
    }

    /// Adds a transition; a non-ε symbol joins the alphabet.
    pub fn add_transition(&mut self, from: usize, symbol: Symbol, to: usize) {
        assert!(from < self.edges.len() && to < self.edges.len());
        if let Some(s) = &symbol {
            if !self.alphabet.contains(s) {
                self.alphabet.insert(s.clone());
            }
        }
        let out = &mut self.edges[from];
        if !out.iter().any(|(sym, t)| *t == to && *sym == symbol) {
            out.push((symbol, to));
        }
    }

    pub fn extend_alphabet(&mut self, symbols: impl IntoIterator<Item = State>) {
        self.alphabet.extend(symbols);
    }

    pub fn edges(&self, s: usize) -> &[(Symbol, usize)] {
        &self.edges[s]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Option<&State>, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(s, out)| out.iter().map(move |(sym, t)| (s, sym.as_ref(), *t)))
    }

    /// Symbols actually read by some transition.
    pub fn used_symbols(&self) -> BTreeSet<State> {
        self.transitions()
            .filter_map(|(_, sym, _)| sym.cloned())
            .collect()
    }

    pub fn reads(&self, q: &State) -> bool {
        self.transitions().any(|(_, sym, _)| sym == Some(q))
    }

    pub fn has_epsilon(&self) -> bool {
        self.transitions().any(|(_, sym, _)| sym.is_none())
    }

    /// Closes `set` under ε-moves.
    pub fn epsilon_closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (sym, t) in &self.edges[s] {
                if sym.is_none() && set.insert(*t) {
                    stack.push(*t);
                }
            }
        }
    }

    pub fn start_set(&self) -> BTreeSet<usize> {
        let mut set = BTreeSet::from([self.initial]);
        self.epsilon_closure(&mut set);
        set
    }

    /// One simulation step on any symbol satisfying `matches`, followed by
    /// ε-closure.
    pub fn step(&self, cur: &BTreeSet<usize>, matches: impl Fn(&State) -> bool) -> BTreeSet<usize> {
        let mut next = BTreeSet::new();
        for &s in cur {
            for (sym, t) in &self.edges[s] {
                if let Some(x) = sym {
                    if matches(x) {
                        next.insert(*t);
                    }
                }
            }
        }
        self.epsilon_closure(&mut next);
        next
    }

    /// Word membership. Every symbol must belong to the alphabet.
    pub fn accepts(&self, word: &[State]) -> Result<bool> {
        if let Some(bad) = word.iter().find(|s| !self.alphabet.contains(*s)) {
            return Err(Error::SymbolNotInAlphabet(bad.clone()));
        }
        Ok(self.accepts_unchecked(word))
    }

    pub(crate) fn accepts_unchecked(&self, word: &[State]) -> bool {
        let mut cur = self.start_set();
        for sym in word {
            if cur.is_empty() {
                return false;
            }
            cur = self.step(&cur, |x| x == sym);
        }
        cur.iter().any(|s| self.finals.contains(s))
    }

    /// Accepts some word `x_1 … x_n` with each `x_i` drawn from `choices[i]`.
    pub fn accepts_some<'a, I>(&self, choices: I) -> bool
    where
        I: IntoIterator<Item = &'a BTreeSet<State>>,
    {
        let mut cur = self.start_set();
        for set in choices {
            if cur.is_empty() {
                return false;
            }
            cur = self.step(&cur, |x| set.contains(x));
        }
        cur.iter().any(|s| self.finals.contains(s))
    }

    fn forward_reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.edges.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for (_, t) in &self.edges[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// States from which a final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); self.edges.len()];
        for (s, _, t) in self.transitions() {
            rev[t].push(s);
        }
        let mut seen = vec![false; self.edges.len()];
        let mut stack: Vec<usize> = self.finals.iter().copied().collect();
        for &f in &stack {
            seen[f] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &rev[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    pub fn is_empty(&self) -> bool {
        let reach = self.forward_reachable();
        !self.finals.iter().any(|&f| reach[f])
    }

    /// Keeps only states that are reachable and co-reachable. The initial
    /// state always survives, so an empty language trims to a single state.
    pub fn trim(&self) -> HorizontalNfa {
        let reach = self.forward_reachable();
        let coreach = self.coreachable();
        let mut map = vec![usize::MAX; self.edges.len()];
        let mut out = HorizontalNfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            finals: BTreeSet::new(),
            edges: Vec::new(),
        };
        map[self.initial] = out.add_state();
        for s in 0..self.edges.len() {
            if s != self.initial && reach[s] && coreach[s] {
                map[s] = out.add_state();
            }
        }
        for (s, sym, t) in self.transitions() {
            if map[s] != usize::MAX && map[t] != usize::MAX {
                out.add_transition(map[s], sym.cloned(), map[t]);
            }
        }
        for &f in &self.finals {
            if map[f] != usize::MAX {
                out.finals.insert(map[f]);
            }
        }
        out
    }

    /// Removes ε-moves without changing the language; the result is trimmed.
    pub fn epsilon_eliminate(&self) -> HorizontalNfa {
        if !self.has_epsilon() {
            return self.trim();
        }
        let mut out = HorizontalNfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            finals: BTreeSet::new(),
            edges: vec![Vec::new(); self.edges.len()],
        };
        for s in 0..self.edges.len() {
            let mut closure = BTreeSet::from([s]);
            self.epsilon_closure(&mut closure);
            for &c in &closure {
                if self.finals.contains(&c) {
                    out.finals.insert(s);
                }
                for (sym, t) in &self.edges[c] {
                    if sym.is_some() {
                        out.add_transition(s, sym.clone(), *t);
                    }
                }
            }
        }
        out.trim()
    }

    /// Embeds `other`'s states into `self`, returning the index offset.
    fn absorb(&mut self, other: &HorizontalNfa) -> usize {
        let offset = self.edges.len();
        for _ in 0..other.edges.len() {
            self.add_state();
        }
        for (s, sym, t) in other.transitions() {
            self.add_transition(s + offset, sym.cloned(), t + offset);
        }
        self.alphabet.extend(other.alphabet.iter().cloned());
        offset
    }

    /// Union with a fresh initial state and ε-moves into both operands.
    pub fn union(&self, other: &HorizontalNfa) -> HorizontalNfa {
        let mut out = HorizontalNfa::new();
        let left = out.absorb(self);
        let right = out.absorb(other);
        out.add_transition(0, None, self.initial + left);
        out.add_transition(0, None, other.initial + right);
        out.finals = self
            .finals
            .iter()
            .map(|f| f + left)
            .chain(other.finals.iter().map(|f| f + right))
            .collect();
        out
    }

    /// Same language with exactly one final state, reached by ε-moves.
    pub fn with_unique_final(&self) -> HorizontalNfa {
        let mut out = self.clone();
        let f = out.add_state();
        for old in &self.finals {
            out.add_transition(*old, None, f);
        }
        out.finals = BTreeSet::from([f]);
        out
    }

    /// Recognizes `{p} · L`: a fresh initial state with a single `p`-move
    /// into the old initial state.
    pub fn prepend(&self, p: &State) -> HorizontalNfa {
        let mut out = self.clone();
        let fresh = out.add_state();
        out.add_transition(fresh, Some(p.clone()), self.initial);
        out.initial = fresh;
        out
    }

    /// Recognizes `L · {p}`: a fresh unique final state entered by `p`-moves
    /// from the old final states.
    pub fn append(&self, p: &State) -> HorizontalNfa {
        let mut out = self.clone();
        let fresh = out.add_state();
        for old in &self.finals {
            out.add_transition(*old, Some(p.clone()), fresh);
        }
        out.finals = BTreeSet::from([fresh]);
        out
    }

    /// Recognizes `{ u p v : uv ∈ L }` with two copies of the automaton: the
    /// run crosses from copy 0 to copy 1 by reading `p` exactly once.
    pub fn insert_anywhere(&self, p: &State) -> HorizontalNfa {
        let n = self.edges.len();
        let mut out = HorizontalNfa {
            alphabet: self.alphabet.clone(),
            initial: self.initial,
            finals: self.finals.iter().map(|f| f + n).collect(),
            edges: vec![Vec::new(); 2 * n],
        };
        for (s, sym, t) in self.transitions() {
            out.add_transition(s, sym.cloned(), t);
            out.add_transition(s + n, sym.cloned(), t + n);
        }
        let reach = self.forward_reachable();
        for s in (0..n).filter(|&s| reach[s]) {
            out.add_transition(s, Some(p.clone()), s + n);
        }
        out.trim()
    }

    /// Renames symbols through `f`; the alphabet is mapped the same way.
    pub fn map_symbols(&self, f: impl Fn(&State) -> State) -> HorizontalNfa {
        HorizontalNfa {
            alphabet: self.alphabet.iter().map(&f).collect(),
            initial: self.initial,
            finals: self.finals.clone(),
            edges: self
                .edges
                .iter()
                .map(|out| {
                    let mut v: Vec<(Symbol, usize)> = Vec::with_capacity(out.len());
                    for (sym, t) in out {
                        let e = (sym.as_ref().map(&f), *t);
                        if !v.contains(&e) {
                            v.push(e);
                        }
                    }
                    v
                })
                .collect(),
        }
    }

    pub fn rename_symbols(&self, map: &BTreeMap<State, State>) -> HorizontalNfa {
        self.map_symbols(|s| map.get(s).cloned().unwrap_or_else(|| s.clone()))
    }

    /// Assembles an automaton from raw parts. Symbols read by transitions
    /// are added to `alphabet`.
    pub fn from_parts(
        alphabet: BTreeSet<State>,
        num_states: usize,
        initial: usize,
        finals: impl IntoIterator<Item = usize>,
        transitions: impl IntoIterator<Item = (usize, Symbol, usize)>,
    ) -> HorizontalNfa {
        let mut out = HorizontalNfa {
            alphabet,
            initial,
            finals: BTreeSet::new(),
            edges: vec![Vec::new(); num_states.max(1)],
        };
        assert!(initial < out.edges.len());
        for (s, sym, t) in transitions {
            out.add_transition(s, sym, t);
        }
        out.set_finals(finals);
        out
    }

    /// Some word of `self` missing from `other`, or `None` if
    /// `L(self) ⊆ L(other)`. Shortest counterexample first.
    pub fn inclusion_counterexample(&self, other: &HorizontalNfa) -> Option<Vec<State>> {
        type Node = (usize, BTreeSet<usize>);
        let start: Node = (self.initial, other.start_set());
        let mut start_closure = BTreeSet::from([self.initial]);
        self.epsilon_closure(&mut start_closure);
        let mut parent: HashMap<Node, Option<(Node, Option<State>)>> = HashMap::new();
        let mut queue = VecDeque::new();
        for s in start_closure {
            let node = (s, start.1.clone());
            if parent.insert(node.clone(), None).is_none() {
                queue.push_back(node);
            }
        }
        while let Some(node) = queue.pop_front() {
            let (s, other_set) = &node;
            if self.finals.contains(s) && !other_set.iter().any(|o| other.finals.contains(o)) {
                let mut word = Vec::new();
                let mut cur = node.clone();
                while let Some(Some((prev, sym))) = parent.get(&cur) {
                    if let Some(x) = sym {
                        word.push(x.clone());
                    }
                    cur = prev.clone();
                }
                word.reverse();
                return Some(word);
            }
            for (sym, t) in &self.edges[*s] {
                let next_other = match sym {
                    None => other_set.clone(),
                    Some(x) => other.step(other_set, |y| y == x),
                };
                let next = (*t, next_other);
                if !parent.contains_key(&next) {
                    parent.insert(next.clone(), Some((node.clone(), sym.clone())));
                    queue.push_back(next);
                }
            }
        }
        None
    }

    pub fn language_eq(&self, other: &HorizontalNfa) -> bool {
        self.inclusion_counterexample(other).is_none()
            && other.inclusion_counterexample(self).is_none()
    }

    /// All accepted words of length at most `max_len` over the alphabet, by
    /// exhaustive membership testing.
    pub fn accepted_words(&self, max_len: usize) -> BTreeSet<Vec<State>> {
        let symbols: Vec<State> = self.alphabet.iter().cloned().collect();
        let mut out = BTreeSet::new();
        let mut layer: Vec<Vec<State>> = vec![Vec::new()];
        for len in 0..=max_len {
            for w in &layer {
                if self.accepts_unchecked(w) {
                    out.insert(w.clone());
                }
            }
            if len == max_len {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|w| {
                    symbols.iter().map(move |s| {
                        let mut v = w.clone();
                        v.push(s.clone());
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Shortest path from the initial state to a final state where reading
    /// symbol `x` costs `weight(x)` (`None` = unusable). Returns the total
    /// cost.
    pub(crate) fn shortest_path(&self, weight: impl Fn(&State) -> Option<usize>) -> Option<usize> {
        self.distances_from_initial(&weight)
            .into_iter()
            .enumerate()
            .filter(|(s, _)| self.finals.contains(s))
            .filter_map(|(_, d)| d)
            .min()
    }

    pub(crate) fn distances_from_initial(&self, weight: &impl Fn(&State) -> Option<usize>) -> Vec<Option<usize>> {
        let mut dist: Vec<Option<usize>> = vec![None; self.edges.len()];
        let mut heap = std::collections::BinaryHeap::new();
        dist[self.initial] = Some(0);
        heap.push(std::cmp::Reverse((0usize, self.initial)));
        while let Some(std::cmp::Reverse((d, s))) = heap.pop() {
            if dist[s].is_some_and(|best| best < d) {
                continue;
            }
            for (sym, t) in &self.edges[s] {
                let w = match sym {
                    None => Some(0),
                    Some(x) => weight(x),
                };
                if let Some(w) = w {
                    let nd = d + w;
                    if dist[*t].is_none_or(|old| nd < old) {
                        dist[*t] = Some(nd);
                        heap.push(std::cmp::Reverse((nd, *t)));
                    }
                }
            }
        }
        dist
    }

    pub(crate) fn distances_to_final(&self, weight: &impl Fn(&State) -> Option<usize>) -> Vec<Option<usize>> {
        let mut rev: Vec<Vec<(Option<&State>, usize)>> = vec![Vec::new(); self.edges.len()];
        for (s, sym, t) in self.transitions() {
            rev[t].push((sym, s));
        }
        let mut dist: Vec<Option<usize>> = vec![None; self.edges.len()];
        let mut heap = std::collections::BinaryHeap::new();
        for &f in &self.finals {
            dist[f] = Some(0);
            heap.push(std::cmp::Reverse((0usize, f)));
        }
        while let Some(std::cmp::Reverse((d, s))) = heap.pop() {
            if dist[s].is_some_and(|best| best < d) {
                continue;
            }
            for (sym, p) in &rev[s] {
                let w = match sym {
                    None => Some(0),
                    Some(x) => weight(x),
                };
                if let Some(w) = w {
                    let nd = d + w;
                    if dist[*p].is_none_or(|old| nd < old) {
                        dist[*p] = Some(nd);
                        heap.push(std::cmp::Reverse((nd, *p)));
                    }
                }
            }
        }
        dist
    }

    /// Any accepted word using only symbols in `usable`.
    pub fn some_word(&self, usable: &HashSet<State>) -> Option<Vec<State>> {
        let mut parent: Vec<Option<(usize, Option<State>)>> = vec![None; self.edges.len()];
        let mut seen = vec![false; self.edges.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            if self.finals.contains(&s) {
                let mut word = Vec::new();
                let mut cur = s;
                while let Some((p, sym)) = &parent[cur] {
                    if let Some(x) = sym {
                        word.push(x.clone());
                    }
                    cur = *p;
                }
                word.reverse();
                return Some(word);
            }
            for (sym, t) in &self.edges[s] {
                let ok = sym.as_ref().is_none_or(|x| usable.contains(x));
                if ok && !seen[*t] {
                    seen[*t] = true;
                    parent[*t] = Some((s, sym.clone()));
                    queue.push_back(*t);
                }
            }
        }
        None
    }
}
