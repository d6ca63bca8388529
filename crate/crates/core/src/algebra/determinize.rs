use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use crate::automaton::HedgeAutomaton;
use crate::error::{Error, Result};
use crate::nfa::HorizontalNfa;
use crate::state::State;
use crate::tree::Label;

pub const DEFAULT_STATE_BUDGET: usize = 1 << 16;

/// Resource limits for subset constructions.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Maximum number of subset states, and of horizontal configurations per
    /// label.
    pub budget: usize,
    pub deadline: Option<Instant>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            budget: DEFAULT_STATE_BUDGET,
            deadline: None,
        }
    }
}

impl Limits {
    pub fn with_budget(budget: usize) -> Self {
        Limits {
            budget,
            deadline: None,
        }
    }

    pub(crate) fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::DeadlineExceeded),
            _ => Ok(()),
        }
    }
}

/// A bottom-up deterministic, complete automaton together with the subset
/// of original states each of its states stands for.
#[derive(Clone, Debug)]
pub struct Determinized {
    pub automaton: HedgeAutomaton,
    pub subsets: BTreeMap<State, BTreeSet<State>>,
}

// A horizontal rule in index form: target state index and ε-free edges over
// state indices.
struct IndexedRule {
    target: usize,
    initial: usize,
    finals: Vec<bool>,
    edges: Vec<Vec<(usize, usize)>>,
}

// Set of (rule, nfa state) pairs, sorted.
type Config = Vec<(u32, u32)>;

struct LabelTable {
    rules: Vec<IndexedRule>,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
    transitions: Vec<Vec<(usize, usize)>>,
    result: Vec<usize>,
}

struct Builder<'a> {
    num_states: usize,
    labels: Vec<LabelTable>,
    subsets: Vec<Vec<bool>>,
    subset_index: HashMap<Vec<bool>, usize>,
    queue: VecDeque<(usize, usize, usize)>,
    limits: &'a Limits,
}

impl Builder<'_> {
    fn add_subset(&mut self, set: Vec<bool>) -> Result<usize> {
        if let Some(&i) = self.subset_index.get(&set) {
            return Ok(i);
        }
        if self.subsets.len() >= self.limits.budget {
            return Err(Error::StateBudgetExceeded {
                budget: self.limits.budget,
            });
        }
        let i = self.subsets.len();
        self.subsets.push(set.clone());
        self.subset_index.insert(set, i);
        for (l, table) in self.labels.iter().enumerate() {
            for c in 0..table.configs.len() {
                self.queue.push_back((l, c, i));
            }
        }
        Ok(i)
    }

    fn add_config(&mut self, l: usize, config: Config) -> Result<usize> {
        if let Some(&c) = self.labels[l].index.get(&config) {
            return Ok(c);
        }
        if self.labels[l].configs.len() >= self.limits.budget {
            return Err(Error::StateBudgetExceeded {
                budget: self.limits.budget,
            });
        }
        let table = &mut self.labels[l];
        let c = table.configs.len();
        let mut result = vec![false; self.num_states];
        for &(r, s) in &config {
            let rule = &table.rules[r as usize];
            if rule.finals[s as usize] {
                result[rule.target] = true;
            }
        }
        table.configs.push(config.clone());
        table.index.insert(config, c);
        table.transitions.push(Vec::new());
        table.result.push(usize::MAX);
        for x in 0..self.subsets.len() {
            self.queue.push_back((l, c, x));
        }
        let r = self.add_subset(result)?;
        self.labels[l].result[c] = r;
        Ok(c)
    }

    fn step(&self, l: usize, c: usize, x: usize) -> Config {
        let table = &self.labels[l];
        let set = &self.subsets[x];
        let mut next: Config = Vec::new();
        for &(r, s) in &table.configs[c] {
            for &(sym, t) in &table.rules[r as usize].edges[s as usize] {
                if set[sym] {
                    next.push((r, t as u32));
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        next
    }
}

/// Subset construction over `sigma`, which must contain the alphabet of `a`.
pub fn determinize_over(a: &HedgeAutomaton, sigma: &BTreeSet<Label>, limits: &Limits) -> Result<Determinized> {
    if let Some(missing) = a.alphabet().iter().find(|l| !sigma.contains(*l)) {
        return Err(Error::AlphabetMismatch(missing.clone()));
    }
    let states: Vec<State> = a.states().iter().cloned().collect();
    let state_index: HashMap<&State, usize> = states.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let labels_in_order: Vec<&Label> = sigma.iter().collect();
    let labels = labels_in_order
        .iter()
        .map(|label| LabelTable {
            rules: a
                .rules_for(label)
                .map(|(q, nfa)| index_rule(nfa, state_index[q], &state_index))
                .collect(),
            configs: Vec::new(),
            index: HashMap::new(),
            transitions: Vec::new(),
            result: Vec::new(),
        })
        .collect();
    let mut b = Builder {
        num_states: states.len(),
        labels,
        subsets: Vec::new(),
        subset_index: HashMap::new(),
        queue: VecDeque::new(),
        limits,
    };
    for l in 0..b.labels.len() {
        let start: Config = b.labels[l]
            .rules
            .iter()
            .enumerate()
            .map(|(r, rule)| (r as u32, rule.initial as u32))
            .collect();
        b.add_config(l, start)?;
    }
    let mut steps = 0usize;
    while let Some((l, c, x)) = b.queue.pop_front() {
        steps += 1;
        if steps % 1024 == 0 {
            limits.check_deadline()?;
        }
        let next = b.step(l, c, x);
        let n = b.add_config(l, next)?;
        b.labels[l].transitions[c].push((x, n));
    }

    let names: Vec<State> = (0..b.subsets.len()).map(|i| State::from(format!("d{i}"))).collect();
    let mut out = HedgeAutomaton::new(format!("det({})", a.name()));
    for label in &labels_in_order {
        out.add_label((*label).clone());
    }
    let mut subsets = BTreeMap::new();
    for (i, set) in b.subsets.iter().enumerate() {
        let members: BTreeSet<State> = set
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(q, _)| states[q].clone())
            .collect();
        if members.iter().any(|q| a.finals().contains(q)) {
            out.add_final(names[i].clone());
        } else {
            out.add_state(names[i].clone());
        }
        subsets.insert(names[i].clone(), members);
    }
    let alphabet: BTreeSet<State> = names.iter().cloned().collect();
    for (l, table) in b.labels.iter().enumerate() {
        let results: BTreeSet<usize> = table.result.iter().copied().collect();
        for r in results {
            let finals = (0..table.configs.len()).filter(|&c| table.result[c] == r);
            let transitions = table
                .transitions
                .iter()
                .enumerate()
                .flat_map(|(c, ts)| ts.iter().map(move |&(x, n)| (c, x, n)))
                .map(|(c, x, n)| (c, Some(names[x].clone()), n));
            let nfa = HorizontalNfa::from_parts(alphabet.clone(), table.configs.len(), 0, finals, transitions);
            out.set_rule(labels_in_order[l].clone(), names[r].clone(), nfa);
        }
    }
    Ok(Determinized {
        automaton: out,
        subsets,
    })
}

fn index_rule(nfa: &HorizontalNfa, target: usize, state_index: &HashMap<&State, usize>) -> IndexedRule {
    let nfa = if nfa.has_epsilon() {
        nfa.epsilon_eliminate()
    } else {
        nfa.clone()
    };
    let n = nfa.num_states();
    let mut edges = vec![Vec::new(); n];
    for (s, sym, t) in nfa.transitions() {
        // Symbols that are not states of the automaton can never be read.
        if let Some(&x) = sym.and_then(|x| state_index.get(x)) {
            edges[s].push((x, t));
        }
    }
    IndexedRule {
        target,
        initial: nfa.initial(),
        finals: (0..n).map(|s| nfa.is_final(s)).collect(),
        edges,
    }
}

/// Deterministic and complete over the automaton's own alphabet.
pub fn determinize(a: &HedgeAutomaton) -> Result<Determinized> {
    determinize_over(a, a.alphabet(), &Limits::default())
}

/// Accepts exactly the trees over `sigma` rejected by `a`.
pub fn complement(a: &HedgeAutomaton, sigma: &BTreeSet<Label>) -> Result<HedgeAutomaton> {
    complement_with(a, sigma, &Limits::default())
}

pub fn complement_with(a: &HedgeAutomaton, sigma: &BTreeSet<Label>, limits: &Limits) -> Result<HedgeAutomaton> {
    let det = determinize_over(a, sigma, limits)?;
    let mut out = det.automaton;
    out.set_name(format!("not({})", a.name()));
    for (d, members) in &det.subsets {
        if members.iter().any(|q| a.finals().contains(q)) {
            out.remove_final(d);
        } else {
            out.add_final(d.clone());
        }
    }
    Ok(out)
}
