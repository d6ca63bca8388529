//! Symbolic Post: the automaton of all documents obtained by applying an
//! update rule, or a script, to every document of a regular language.
//!
//! The document automaton is rewritten in place; the types automaton is
//! kept apart and added back by [`PostContext::assemble`], so its states can
//! evaluate inserted material.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::productive_states;
use crate::automaton::{state_hygiene, HedgeAutomaton};
use crate::error::{Error, Result};
use crate::nfa::HorizontalNfa;
use crate::rewrite::{UpdateKind, UpdateRule, UpdateScript};
use crate::state::{FreshNames, State};
use crate::tree::Label;

/// How insertion at an unspecified child position is realized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InsIntoMode {
    /// Any position among the children.
    #[default]
    Anywhere,
    First,
    Last,
}

#[derive(Clone, Debug)]
pub struct PostContext {
    doc: HedgeAutomaton,
    types: HedgeAutomaton,
    fresh: FreshNames,
    /// States of `types` as they were at entry; reads of these in `doc`
    /// denote inserted material.
    type_states: BTreeSet<State>,
    original_doc_states: BTreeSet<State>,
}

impl PostContext {
    /// Sets up a context, renaming document states that clash with type
    /// states.
    pub fn new(doc: &HedgeAutomaton, types: &HedgeAutomaton) -> Self {
        let (doc, _) = state_hygiene(doc, types.states());
        let fresh = FreshNames::new(doc.states().iter().chain(types.states()).cloned());
        PostContext {
            original_doc_states: doc.states().clone(),
            type_states: types.states().clone(),
            doc,
            types: types.clone(),
            fresh,
        }
    }

    pub fn doc(&self) -> &HedgeAutomaton {
        &self.doc
    }

    pub fn types(&self) -> &HedgeAutomaton {
        &self.types
    }

    /// States created by the constructions so far.
    pub fn fresh_states(&self) -> BTreeSet<State> {
        self.doc
            .states()
            .difference(&self.original_doc_states)
            .cloned()
            .collect()
    }

    /// Every horizontal automaton of the document reads over `P ∪ Q_L`.
    pub fn expand_alphabets(&mut self) {
        let all: Vec<State> = self.doc.states().iter().chain(self.types.states()).cloned().collect();
        self.doc.map_rules(|_, _, nfa| {
            let mut nfa = nfa.clone();
            nfa.extend_alphabet(all.iter().cloned());
            nfa
        });
    }

    fn reads_types(&self) -> bool {
        self.doc.finals().iter().any(|q| self.type_states.contains(q))
            || self
                .doc
                .rules()
                .any(|(_, _, nfa)| nfa.used_symbols().iter().any(|x| self.type_states.contains(x)))
    }

    /// Gives material inserted by earlier rules its own copy of the types
    /// automaton inside the document, so later rules rewrite it while fresh
    /// insertions still refer to the untouched types.
    fn absorb_inserted(&mut self) {
        let map: BTreeMap<State, State> = self
            .type_states
            .iter()
            .map(|p| (p.clone(), self.fresh.fresh(p)))
            .collect();
        let renamed_doc = self.doc.rename_states(&map);
        let copy = self.types.rename_states(&map);
        let mut doc = HedgeAutomaton::new(self.doc.name());
        for l in renamed_doc.alphabet().iter().chain(copy.alphabet()) {
            doc.add_label(l.clone());
        }
        for q in renamed_doc.states().iter().chain(copy.states()) {
            doc.add_state(q.clone());
        }
        for q in renamed_doc.finals() {
            doc.add_final(q.clone());
        }
        for (l, q, nfa) in renamed_doc.rules().chain(copy.rules()) {
            doc.add_rule(l.clone(), q.clone(), nfa.clone());
        }
        self.doc = doc;
    }

    /// Makes every `a`-node evaluate to a state produced by `a` alone. A
    /// state shared with other labels is split into a fresh copy for `a`,
    /// read wherever the original is read. Returns the states produced by
    /// `a` afterwards.
    pub fn split_shared_state(&mut self, a: &Label) -> Vec<State> {
        let targets: Vec<State> = self.doc.rules_for(a).map(|(q, _)| q.clone()).collect();
        let mut result = Vec::new();
        let mut renamed: BTreeMap<State, State> = BTreeMap::new();
        for q in targets {
            let shared = self.doc.producers(&q).iter().any(|l| *l != a);
            if !shared {
                result.push(q);
                continue;
            }
            let fresh = self.fresh.fresh(&q);
            let nfa = self.doc.remove_rule(a, &q).expect("rule listed above");
            self.doc.set_rule(a.clone(), fresh.clone(), nfa);
            if self.doc.finals().contains(&q) {
                self.doc.add_final(fresh.clone());
            }
            renamed.insert(q, fresh.clone());
            result.push(fresh);
        }
        if !renamed.is_empty() {
            self.doc.map_rules(|_, _, nfa| add_parallel_edges(nfa, &renamed));
        }
        result
    }

    pub fn post_ren(&mut self, a: &Label, b: &Label) {
        if a == b {
            return;
        }
        self.doc.add_label(b.clone());
        let moved: Vec<(State, HorizontalNfa)> = self
            .doc
            .rules_for(a)
            .map(|(q, nfa)| (q.clone(), nfa.clone()))
            .collect();
        for (q, nfa) in moved {
            self.doc.remove_rule(a, &q);
            self.doc.add_rule(b.clone(), q, nfa);
        }
    }

    pub fn post_ins_first(&mut self, a: &Label, p: &State) {
        self.map_label(a, |nfa| nfa.prepend(p));
    }

    pub fn post_ins_last(&mut self, a: &Label, p: &State) {
        self.map_label(a, |nfa| nfa.append(p));
    }

    pub fn post_ins_into(&mut self, a: &Label, p: &State, mode: InsIntoMode) {
        match mode {
            InsIntoMode::First => self.post_ins_first(a, p),
            InsIntoMode::Last => self.post_ins_last(a, p),
            InsIntoMode::Anywhere => self.map_label(a, |nfa| nfa.insert_anywhere(p)),
        }
    }

    fn map_label(&mut self, a: &Label, f: impl Fn(&HorizontalNfa) -> HorizontalNfa) {
        let targets: Vec<State> = self.doc.rules_for(a).map(|(q, _)| q.clone()).collect();
        for q in targets {
            let nfa = f(self.doc.rule(a, &q).expect("rule listed above"));
            self.doc.set_rule(a.clone(), q, nfa);
        }
    }

    pub fn post_ins_before(&mut self, a: &Label, p: &State) {
        let states = self.split_shared_state(a);
        self.doc
            .map_rules(|_, _, nfa| surround(nfa, &states, |q| vec![p.clone(), q.clone()]));
    }

    pub fn post_ins_after(&mut self, a: &Label, p: &State) {
        let states = self.split_shared_state(a);
        self.doc
            .map_rules(|_, _, nfa| surround(nfa, &states, |q| vec![q.clone(), p.clone()]));
    }

    // States of `states` that some tree evaluates to. Edges reading any
    // other state could never fire, so surgery must not revive them.
    fn productive_among(&self, states: &[State]) -> (Vec<State>, Vec<State>) {
        let whole = self.assemble_ref();
        let productive = productive_states(&whole);
        states.iter().cloned().partition(|q| productive.contains(q))
    }

    pub fn post_del(&mut self, a: &Label) {
        let states = self.split_shared_state(a);
        let (live, dead) = self.productive_among(&states);
        let dead: BTreeSet<State> = dead.into_iter().collect();
        self.doc.map_rules(|_, _, nfa| {
            let nfa = drop_reads(nfa, &dead);
            surround(&nfa, &live, |_| Vec::new())
        });
    }

    pub fn post_rpl(&mut self, a: &Label, p: &State) {
        let states = self.split_shared_state(a);
        let (live, dead) = self.productive_among(&states);
        let dead: BTreeSet<State> = dead.into_iter().collect();
        self.doc.map_rules(|_, _, nfa| {
            let nfa = drop_reads(nfa, &dead);
            surround(&nfa, &live, |_| vec![p.clone()])
        });
        // A replaced root is an instance of p.
        for q in &live {
            if self.doc.finals().contains(q) {
                self.doc.remove_final(q);
                self.doc.add_final(p.clone());
            }
            self.doc.remove_rule(a, q);
        }
    }

    /// Applies one rule.
    pub fn post_rule(&mut self, r: &UpdateRule, mode: InsIntoMode) -> Result<()> {
        if let Some(p) = r.type_state() {
            if !self.types.states().contains(p) {
                return Err(Error::UnknownTypeState(p.clone()));
            }
        }
        if self.types.alphabet().contains(r.target()) && self.reads_types() {
            self.absorb_inserted();
        }
        self.expand_alphabets();
        let a = r.target();
        let p = r.type_state();
        match r.kind() {
            UpdateKind::Ren => self.post_ren(a, r.new_label().expect("ren has a new label")),
            UpdateKind::Del => self.post_del(a),
            UpdateKind::Rpl => self.post_rpl(a, p.expect("typed rule")),
            UpdateKind::InsFirst => self.post_ins_first(a, p.expect("typed rule")),
            UpdateKind::InsLast => self.post_ins_last(a, p.expect("typed rule")),
            UpdateKind::InsInto => self.post_ins_into(a, p.expect("typed rule"), mode),
            UpdateKind::InsBefore => self.post_ins_before(a, p.expect("typed rule")),
            UpdateKind::InsAfter => self.post_ins_after(a, p.expect("typed rule")),
        }
        Ok(())
    }

    fn assemble_ref(&self) -> HedgeAutomaton {
        let mut out = HedgeAutomaton::new(format!("post({})", self.doc.name()));
        for l in self.types.alphabet().iter().chain(self.doc.alphabet()) {
            out.add_label(l.clone());
        }
        for q in self.types.states().iter().chain(self.doc.states()) {
            out.add_state(q.clone());
        }
        for q in self.doc.finals() {
            out.add_final(q.clone());
        }
        for (l, q, nfa) in self.types.rules().chain(self.doc.rules()) {
            out.add_rule(l.clone(), q.clone(), nfa.clone());
        }
        out
    }

    /// The types rules together with the non-empty document rules; final
    /// states are those of the document.
    pub fn assemble(self) -> HedgeAutomaton {
        self.assemble_ref()
    }
}

// Adds `(s, q', s')` next to every `(s, q, s')` with `q ↦ q'` in `renamed`.
fn add_parallel_edges(nfa: &HorizontalNfa, renamed: &BTreeMap<State, State>) -> HorizontalNfa {
    let extra: Vec<(usize, Option<State>, usize)> = nfa
        .transitions()
        .filter_map(|(s, x, t)| renamed.get(x?).map(|q| (s, Some(q.clone()), t)))
        .collect();
    if extra.is_empty() {
        return nfa.clone();
    }
    let mut out = nfa.clone();
    for (s, x, t) in extra {
        out.add_transition(s, x, t);
    }
    out
}

fn drop_reads(nfa: &HorizontalNfa, dead: &BTreeSet<State>) -> HorizontalNfa {
    if dead.is_empty() || !dead.iter().any(|q| nfa.reads(q)) {
        return nfa.clone();
    }
    let transitions: Vec<_> = nfa
        .transitions()
        .filter(|(_, x, _)| !x.is_some_and(|x| dead.contains(x)))
        .map(|(s, x, t)| (s, x.cloned(), t))
        .collect();
    HorizontalNfa::from_parts(
        nfa.alphabet().clone(),
        nfa.num_states(),
        nfa.initial(),
        nfa.finals().iter().copied(),
        transitions,
    )
}

// Replaces every edge `(s, q, s')` with `q ∈ states` by a path spelling
// `word(q)`. Paths from different sources never share intermediate states.
fn surround(nfa: &HorizontalNfa, states: &[State], word: impl Fn(&State) -> Vec<State>) -> HorizontalNfa {
    if !states.iter().any(|q| nfa.reads(q)) {
        return nfa.clone();
    }
    let mut out = HorizontalNfa::from_parts(
        nfa.alphabet().clone(),
        nfa.num_states(),
        nfa.initial(),
        nfa.finals().iter().copied(),
        nfa.transitions()
            .filter(|(_, x, _)| !x.is_some_and(|x| states.contains(x)))
            .map(|(s, x, t)| (s, x.cloned(), t)),
    );
    // Intermediate states are shared per (source, symbol) for paths that
    // start alike, and per (symbol, target) for paths that end alike.
    let mut by_source: BTreeMap<(usize, State), usize> = BTreeMap::new();
    let mut by_target: BTreeMap<(State, usize), usize> = BTreeMap::new();
    for (s, x, t) in nfa.transitions() {
        let Some(q) = x.filter(|x| states.contains(x)) else { continue };
        let w = word(q);
        match w.len() {
            0 => out.add_transition(s, None, t),
            1 => out.add_transition(s, Some(w[0].clone()), t),
            2 if w[1] == *q => {
                // p q: one intermediate per source.
                let m = *by_source
                    .entry((s, q.clone()))
                    .or_insert_with(|| out.add_state());
                out.add_transition(s, Some(w[0].clone()), m);
                out.add_transition(m, Some(w[1].clone()), t);
            }
            2 => {
                // q p: one intermediate per target.
                let m = *by_target
                    .entry((q.clone(), t))
                    .or_insert_with(|| out.add_state());
                out.add_transition(s, Some(w[0].clone()), m);
                out.add_transition(m, Some(w[1].clone()), t);
            }
            _ => unreachable!("surgery words have at most two symbols"),
        }
    }
    out
}

/// Applies the script rule by rule and assembles the result.
pub fn post_script(a_l: &HedgeAutomaton, script: &UpdateScript) -> Result<HedgeAutomaton> {
    post_script_with(a_l, script, InsIntoMode::Anywhere)
}

pub fn post_script_with(a_l: &HedgeAutomaton, script: &UpdateScript, mode: InsIntoMode) -> Result<HedgeAutomaton> {
    let mut ctx = PostContext::new(a_l, script.types());
    ctx.expand_alphabets();
    for r in script.rules() {
        ctx.post_rule(r, mode)?;
    }
    Ok(ctx.assemble())
}

/// The rule as a rewrite under the given insertion mode: with `First` or
/// `Last`, insertion into the children becomes `ins_first` or `ins_last`.
pub fn resolve_ins_into(r: &UpdateRule, mode: InsIntoMode) -> UpdateRule {
    match (r.kind(), mode) {
        (UpdateKind::InsInto, InsIntoMode::First) => r.with_kind(UpdateKind::InsFirst),
        (UpdateKind::InsInto, InsIntoMode::Last) => r.with_kind(UpdateKind::InsLast),
        _ => r.clone(),
    }
}
