//! The native automaton text format.
//!
//! ```text
//! automaton A
//! alphabet a b c
//! states q1 q2
//! final q1
//! rule a (q2* q1 | q2+) -> q1
//! rule b () -> q2
//! rule c -> q1 nfa { start s0; final s1; s0 q2 s1; s1 eps s0; }
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::automaton::HedgeAutomaton;
use crate::error::Result;
use crate::frontend::lex::{Cursor, Tok};
use crate::nfa::HorizontalNfa;
use crate::regex::Regex;
use crate::state::State;
use crate::tree::Label;

pub fn parse_ha(text: &str) -> Result<HedgeAutomaton> {
    parse_ha_with_warnings(text).map(|(a, _)| a)
}

/// Parses an automaton. Repeated rules for the same label and target are
/// merged by union and reported as warnings.
pub fn parse_ha_with_warnings(text: &str) -> Result<(HedgeAutomaton, Vec<String>)> {
    let mut c = Cursor::new(text)?;
    let mut warnings = Vec::new();
    let mut name = String::from("A");
    let mut alphabet: BTreeSet<Label> = BTreeSet::new();
    let mut states: BTreeSet<State> = BTreeSet::new();
    let mut finals: Vec<(State, usize)> = Vec::new();
    let mut rules: Vec<(Label, State, HorizontalNfa, usize)> = Vec::new();
    let mut reads: Vec<(State, usize)> = Vec::new();

    c.skip_newlines();
    while c.peek().is_some() {
        let at = c.offset();
        let keyword = c.word("a statement keyword")?;
        match keyword.as_str() {
            "automaton" => name = c.word("automaton name")?,
            "alphabet" => {
                while !c.at_line_end() {
                    let at = c.offset();
                    let w = c.word("label")?;
                    alphabet.insert(Label::new(&w).map_err(|_| crate::Error::syntax(text, at, format!("invalid label `{w}`")))?);
                }
            }
            "states" => {
                while !c.at_line_end() {
                    states.insert(state_token(&mut c)?);
                }
            }
            "final" => {
                while !c.at_line_end() {
                    let at = c.offset();
                    finals.push((state_token(&mut c)?, at));
                }
            }
            "rule" => {
                let label_at = c.offset();
                let w = c.word("label")?;
                let label = Label::new(&w).map_err(|_| crate::Error::syntax(text, label_at, format!("invalid label `{w}`")))?;
                if !alphabet.contains(&label) {
                    return Err(crate::Error::syntax(text, label_at, format!("label `{w}` is not in the alphabet")));
                }
                let regex_at = c.offset();
                let regex = parse_alt(&mut c)?;
                c.expect_punct("->")?;
                let target_at = c.offset();
                let target = state_token(&mut c)?;
                reads.push((target.clone(), target_at));
                let nfa = if c.at_word("nfa") {
                    c.next();
                    if regex != Regex::Concat(Vec::new()) {
                        return Err(crate::Error::syntax(text, regex_at, "a rule has either a regex or an nfa block"));
                    }
                    parse_nfa_block(&mut c, &mut reads)?
                } else {
                    for s in regex.symbols() {
                        reads.push((s.0.clone(), s.1));
                    }
                    regex.map(&|s: &(State, usize)| s.0.clone()).to_nfa()
                };
                rules.push((label, target, nfa, at));
            }
            other => return Err(crate::Error::syntax(text, at, format!("unknown statement `{other}`"))),
        }
        c.end_line()?;
        c.skip_newlines();
    }

    for (q, at) in finals.iter().chain(&reads) {
        if !states.contains(q) && !finals.iter().any(|(f, _)| f == q) {
            return Err(crate::Error::syntax(text, *at, format!("undeclared state `{q}`")));
        }
    }
    let mut out = HedgeAutomaton::new(name);
    for l in alphabet {
        out.add_label(l);
    }
    for q in states {
        out.add_state(q);
    }
    for (q, _) in finals {
        out.add_final(q);
    }
    let mut seen: BTreeMap<(Label, State), usize> = BTreeMap::new();
    for (label, target, nfa, at) in rules {
        if let Some(first) = seen.insert((label.clone(), target.clone()), at) {
            let loc = crate::Location::of_offset(text, at);
            let first = crate::Location::of_offset(text, first);
            warnings.push(format!(
                "{loc}: rule for ({label}, {target}) repeats the one at {first}; merged by union"
            ));
        }
        let mut nfa = nfa;
        nfa.extend_alphabet(out.states().iter().cloned());
        out.add_rule(label, target, nfa);
    }
    Ok((out, warnings))
}

fn state_token(c: &mut Cursor) -> Result<State> {
    let at = c.offset();
    let w = c.word("state")?;
    let q = State::from(w.as_str());
    if !q.is_token() {
        return Err(crate::Error::syntax(c.text, at, format!("invalid state name `{w}`")));
    }
    Ok(q)
}

// alt := seq ('|' seq)* ; seq := postfix* ; postfix := atom ('*' | '+' | '?')*
fn parse_alt(c: &mut Cursor) -> Result<Regex<(State, usize)>> {
    let mut items = vec![parse_seq(c)?];
    while c.eat_punct("|") {
        items.push(parse_seq(c)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Alt(items) })
}

fn parse_seq(c: &mut Cursor) -> Result<Regex<(State, usize)>> {
    let mut items = Vec::new();
    loop {
        let atom = match c.peek() {
            Some(Tok::Punct("(")) => {
                c.next();
                let inner = parse_alt(c)?;
                c.expect_punct(")")?;
                inner
            }
            Some(Tok::Word(_)) => {
                let at = c.offset();
                Regex::Symbol((state_token(c)?, at))
            }
            _ => break,
        };
        let mut atom = atom;
        loop {
            if c.eat_punct("*") {
                atom = Regex::Star(Box::new(atom));
            } else if c.eat_punct("+") {
                atom = Regex::Plus(Box::new(atom));
            } else if c.eat_punct("?") {
                atom = Regex::Optional(Box::new(atom));
            } else {
                break;
            }
        }
        items.push(atom);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { Regex::Concat(items) })
}

// nfa { start s; final s1 s2; s x t; s eps t; }
fn parse_nfa_block(c: &mut Cursor, reads: &mut Vec<(State, usize)>) -> Result<HorizontalNfa> {
    c.expect_punct("{")?;
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let id = |name: String, index: &mut BTreeMap<String, usize>| {
        let n = index.len();
        *index.entry(name).or_insert(n)
    };
    let mut start = None;
    let mut finals = Vec::new();
    let mut transitions = Vec::new();
    while !c.eat_punct("}") {
        if c.peek().is_none() {
            return Err(c.error("unterminated nfa block"));
        }
        let first = c.word("nfa statement")?;
        match first.as_str() {
            "start" => {
                let s = c.word("nfa state")?;
                start = Some(id(s, &mut index));
            }
            "final" => {
                while !c.at_punct(";") && !c.at_punct("}") {
                    let s = c.word("nfa state")?;
                    finals.push(id(s, &mut index));
                }
            }
            _ => {
                let from = id(first, &mut index);
                let at = c.offset();
                let sym = c.word("symbol or eps")?;
                let sym = if sym == "eps" {
                    None
                } else {
                    let q = State::from(sym.as_str());
                    if !q.is_token() {
                        return Err(crate::Error::syntax(c.text, at, format!("invalid state name `{sym}`")));
                    }
                    reads.push((q.clone(), at));
                    Some(q)
                };
                let to = c.word("nfa state")?;
                transitions.push((from, sym, id(to, &mut index)));
            }
        }
        if !c.eat_punct(";") && !c.at_punct("}") {
            return Err(c.error("expected `;`"));
        }
    }
    let Some(start) = start else {
        return Err(c.error("nfa block has no start state"));
    };
    Ok(HorizontalNfa::from_parts(
        BTreeSet::new(),
        index.len(),
        start,
        finals,
        transitions,
    ))
}

/// Prints an automaton in the native format. Horizontal languages are
/// written as `nfa` blocks, so printing is lossless.
pub fn print_ha(a: &HedgeAutomaton) -> String {
    let mut out = String::new();
    let name: String = a
        .name()
        .chars()
        .map(|ch| if crate::tree::is_token_char(ch) { ch } else { '_' })
        .collect();
    let name = if name.is_empty() { "A".to_string() } else { name };
    let _ = writeln!(out, "automaton {name}");
    let _ = writeln!(out, "alphabet {}", join(a.alphabet()));
    let _ = writeln!(out, "states {}", join(a.states()));
    if !a.finals().is_empty() {
        let _ = writeln!(out, "final {}", join(a.finals()));
    }
    for (label, q, nfa) in a.rules() {
        let _ = write!(out, "rule {label} -> {q} nfa {{ start n{};", nfa.initial());
        if !nfa.finals().is_empty() {
            out.push_str(" final");
            for f in nfa.finals() {
                let _ = write!(out, " n{f}");
            }
            out.push(';');
        }
        for (s, sym, t) in nfa.transitions() {
            match sym {
                Some(x) => {
                    let _ = write!(out, " n{s} {x} n{t};");
                }
                None => {
                    let _ = write!(out, " n{s} eps n{t};");
                }
            }
        }
        out.push_str(" }\n");
    }
    out
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}
