//! Regular expressions over arbitrary symbols and their Thompson
//! construction into horizontal automata.

use std::collections::BTreeSet;
use std::fmt;

use crate::nfa::HorizontalNfa;
use crate::state::State;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regex<T> {
    /// The empty word.
    Epsilon,
    Symbol(T),
    Concat(Vec<Regex<T>>),
    Alt(Vec<Regex<T>>),
    Star(Box<Regex<T>>),
    Plus(Box<Regex<T>>),
    Optional(Box<Regex<T>>),
}

impl<T> Regex<T> {
    pub fn map<U>(&self, f: &impl Fn(&T) -> U) -> Regex<U> {
        match self {
            Regex::Epsilon => Regex::Epsilon,
            Regex::Symbol(t) => Regex::Symbol(f(t)),
            Regex::Concat(items) => Regex::Concat(items.iter().map(|r| r.map(f)).collect()),
            Regex::Alt(items) => Regex::Alt(items.iter().map(|r| r.map(f)).collect()),
            Regex::Star(r) => Regex::Star(Box::new(r.map(f))),
            Regex::Plus(r) => Regex::Plus(Box::new(r.map(f))),
            Regex::Optional(r) => Regex::Optional(Box::new(r.map(f))),
        }
    }

    pub fn symbols(&self) -> Vec<&T> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a T>) {
        match self {
            Regex::Epsilon => {}
            Regex::Symbol(t) => out.push(t),
            Regex::Concat(items) | Regex::Alt(items) => {
                items.iter().for_each(|r| r.collect_symbols(out))
            }
            Regex::Star(r) | Regex::Plus(r) | Regex::Optional(r) => r.collect_symbols(out),
        }
    }

    /// Direct backtracking matcher, independent of any automaton.
    pub fn matches(&self, word: &[T]) -> bool
    where
        T: PartialEq,
    {
        self.ends(word, 0).contains(&word.len())
    }

    // All indices j such that self matches word[start..j].
    fn ends(&self, word: &[T], start: usize) -> BTreeSet<usize>
    where
        T: PartialEq,
    {
        match self {
            Regex::Epsilon => BTreeSet::from([start]),
            Regex::Symbol(t) => match word.get(start) {
                Some(x) if x == t => BTreeSet::from([start + 1]),
                _ => BTreeSet::new(),
            },
            Regex::Concat(items) => {
                let mut cur = BTreeSet::from([start]);
                for r in items {
                    cur = cur.iter().flat_map(|&i| r.ends(word, i)).collect();
                }
                cur
            }
            Regex::Alt(items) => items.iter().flat_map(|r| r.ends(word, start)).collect(),
            Regex::Optional(r) => {
                let mut out = r.ends(word, start);
                out.insert(start);
                out
            }
            Regex::Star(r) | Regex::Plus(r) => {
                let mut out = BTreeSet::new();
                if matches!(self, Regex::Star(_)) {
                    out.insert(start);
                }
                let mut frontier = r.ends(word, start);
                while !frontier.is_empty() {
                    let fresh: Vec<usize> = frontier.iter().copied().filter(|i| out.insert(*i)).collect();
                    frontier = fresh
                        .iter()
                        .flat_map(|&i| r.ends(word, i))
                        .filter(|j| !out.contains(j))
                        .collect();
                }
                out
            }
        }
    }
}

impl Regex<State> {
    /// Thompson construction followed by ε-elimination.
    pub fn to_nfa(&self) -> HorizontalNfa {
        let mut nfa = HorizontalNfa::new();
        let end = nfa.add_state();
        self.build(&mut nfa, 0, end);
        nfa.add_final(end);
        nfa.epsilon_eliminate()
    }

    fn build(&self, nfa: &mut HorizontalNfa, from: usize, to: usize) {
        match self {
            Regex::Epsilon => nfa.add_transition(from, None, to),
            Regex::Symbol(s) => nfa.add_transition(from, Some(s.clone()), to),
            Regex::Concat(items) => {
                let mut cur = from;
                for (i, r) in items.iter().enumerate() {
                    let next = if i + 1 == items.len() { to } else { nfa.add_state() };
                    r.build(nfa, cur, next);
                    cur = next;
                }
                if items.is_empty() {
                    nfa.add_transition(from, None, to);
                }
            }
            Regex::Alt(items) => {
                for r in items {
                    r.build(nfa, from, to);
                }
            }
            Regex::Star(r) => {
                let hub = nfa.add_state();
                nfa.add_transition(from, None, hub);
                nfa.add_transition(hub, None, to);
                let back = nfa.add_state();
                r.build(nfa, hub, back);
                nfa.add_transition(back, None, hub);
            }
            Regex::Plus(r) => {
                let start = nfa.add_state();
                let end = nfa.add_state();
                nfa.add_transition(from, None, start);
                r.build(nfa, start, end);
                nfa.add_transition(end, None, start);
                nfa.add_transition(end, None, to);
            }
            Regex::Optional(r) => {
                nfa.add_transition(from, None, to);
                r.build(nfa, from, to);
            }
        }
    }
}

impl<T: fmt::Display> fmt::Display for Regex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regex::Epsilon => f.write_str("()"),
            Regex::Symbol(t) => write!(f, "{t}"),
            Regex::Concat(items) => {
                f.write_str("(")?;
                for (i, r) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{r}")?;
                }
                f.write_str(")")
            }
            Regex::Alt(items) => {
                f.write_str("(")?;
                for (i, r) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{r}")?;
                }
                f.write_str(")")
            }
            Regex::Star(r) => write!(f, "{r}*"),
            Regex::Plus(r) => write!(f, "{r}+"),
            Regex::Optional(r) => write!(f, "{r}?"),
        }
    }
}
