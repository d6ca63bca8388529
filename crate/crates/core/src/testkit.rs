//! Fixtures and seeded generators shared by tests, benches and the CLI
//! acceptance suite.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::HedgeAutomaton;
use crate::frontend::{compile_dtd, parse_dtd, parse_ha, parse_updates};
use crate::nfa::HorizontalNfa;
use crate::rewrite::{UpdateKind, UpdateRule, UpdateScript};
use crate::state::State;
use crate::tree::{Label, Tree};

pub const BOOLEAN_HA: &str = include_str!("../fixtures/boolean.ha");
pub const EXAMPLE_DOC_HA: &str = include_str!("../fixtures/example_doc.ha");
pub const EXAMPLE_TYPES_HA: &str = include_str!("../fixtures/example_types.ha");
pub const EXAMPLE_UPD: &str = include_str!("../fixtures/example.upd");
pub const XMARK_DTD: &str = include_str!("../fixtures/xmark.dtd");
pub const XMARK_EVOLVED_DTD: &str = include_str!("../fixtures/xmark_evolved.dtd");
pub const XMARK_EVOLVED_NO_CURRENCY_DTD: &str = include_str!("../fixtures/xmark_evolved_no_currency.dtd");
pub const XMARK_TYPES_HA: &str = include_str!("../fixtures/xmark_types.ha");
pub const XMARK_UPD: &str = include_str!("../fixtures/xmark.upd");

pub fn boolean() -> HedgeAutomaton {
    parse_ha(BOOLEAN_HA).expect("fixture parses")
}

pub fn example_doc() -> HedgeAutomaton {
    parse_ha(EXAMPLE_DOC_HA).expect("fixture parses")
}

pub fn example_types() -> HedgeAutomaton {
    parse_ha(EXAMPLE_TYPES_HA).expect("fixture parses")
}

pub fn example_script() -> UpdateScript {
    parse_updates(EXAMPLE_UPD, &example_types()).expect("fixture parses")
}

pub fn xmark() -> HedgeAutomaton {
    compile_dtd(&parse_dtd(XMARK_DTD).expect("fixture parses")).expect("fixture compiles")
}

pub fn xmark_evolved() -> HedgeAutomaton {
    compile_dtd(&parse_dtd(XMARK_EVOLVED_DTD).expect("fixture parses")).expect("fixture compiles")
}

pub fn xmark_evolved_no_currency() -> HedgeAutomaton {
    compile_dtd(&parse_dtd(XMARK_EVOLVED_NO_CURRENCY_DTD).expect("fixture parses")).expect("fixture compiles")
}

pub fn xmark_types() -> HedgeAutomaton {
    parse_ha(XMARK_TYPES_HA).expect("fixture parses")
}

pub fn xmark_script() -> UpdateScript {
    parse_updates(XMARK_UPD, &xmark_types()).expect("fixture parses")
}

pub fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|n| Label::new(n).expect("valid label")).collect()
}

pub fn states(names: &[&str]) -> Vec<State> {
    names.iter().map(|n| State::from(*n)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every tree over `labels` with at most `max_nodes` nodes, smallest first.
pub fn all_trees(labels: &[Label], max_nodes: usize) -> Vec<Tree> {
    // by_size[n] holds the trees of exactly n nodes, hedges[n] the hedges.
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new()];
    let mut hedges: Vec<Vec<Vec<Tree>>> = vec![vec![Vec::new()]];
    for n in 1..=max_nodes {
        let trees: Vec<Tree> = labels
            .iter()
            .flat_map(|l| hedges[n - 1].iter().map(move |h| Tree::new(l.clone(), h.clone())))
            .collect();
        by_size.push(trees);
        let mut hs = Vec::new();
        for first in 1..=n {
            for t in &by_size[first] {
                for rest in &hedges[n - first] {
                    let mut h = Vec::with_capacity(rest.len() + 1);
                    h.push(t.clone());
                    h.extend(rest.iter().cloned());
                    hs.push(h);
                }
            }
        }
        hedges.push(hs);
    }
    by_size.into_iter().flatten().collect()
}

/// Every well-formed Boolean formula tree with at most `max_nodes` nodes:
/// leaves `0` and `1`, unary `not`, and `and`/`or` with one or more
/// operands.
pub fn boolean_formulas(max_nodes: usize) -> Vec<Tree> {
    let [zero, one, not, and, or]: [Label; 5] = labels(&["0", "1", "not", "and", "or"]).try_into().expect("five labels");
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new()];
    // Non-empty hedges of formulas, by total size.
    let mut hedges: Vec<Vec<Vec<Tree>>> = vec![Vec::new()];
    for n in 1..=max_nodes {
        let mut trees = Vec::new();
        if n == 1 {
            trees.push(Tree::leaf(zero.clone()));
            trees.push(Tree::leaf(one.clone()));
        } else {
            for f in &by_size[n - 1] {
                trees.push(Tree::new(not.clone(), vec![f.clone()]));
            }
            for h in &hedges[n - 1] {
                trees.push(Tree::new(and.clone(), h.clone()));
                trees.push(Tree::new(or.clone(), h.clone()));
            }
        }
        by_size.push(trees);
        let mut hs: Vec<Vec<Tree>> = by_size[n].iter().map(|t| vec![t.clone()]).collect();
        for first in 1..n {
            for t in &by_size[first] {
                for rest in &hedges[n - first] {
                    let mut h = Vec::with_capacity(rest.len() + 1);
                    h.push(t.clone());
                    h.extend(rest.iter().cloned());
                    hs.push(h);
                }
            }
        }
        hedges.push(hs);
    }
    by_size.into_iter().flatten().collect()
}

/// All words over `symbols` of length at most `max_len`.
pub fn all_words(symbols: &[State], max_len: usize) -> Vec<Vec<State>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let next: Vec<Vec<State>> = layer
            .iter()
            .flat_map(|w: &Vec<State>| {
                symbols.iter().map(move |s| {
                    let mut w = w.clone();
                    w.push(s.clone());
                    w
                })
            })
            .collect();
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// A random NFA over `symbols` with `num_states` states. With `epsilon`,
/// some transitions are ε-moves.
pub fn random_nfa(rng: &mut ChaCha8Rng, symbols: &[State], num_states: usize, epsilon: bool) -> HorizontalNfa {
    let n = num_states.max(1);
    let mut transitions = Vec::new();
    for s in 0..n {
        let out_degree = rng.random_range(0..=2);
        for _ in 0..out_degree {
            let to = rng.random_range(0..n);
            let sym = if epsilon && rng.random_bool(0.2) {
                None
            } else {
                symbols.choose(rng).cloned()
            };
            transitions.push((s, sym, to));
        }
    }
    let finals: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    HorizontalNfa::from_parts(symbols.iter().cloned().collect(), n, 0, finals, transitions)
}

/// Shape of a random automaton.
#[derive(Clone, Debug)]
pub struct AutomatonShape {
    pub labels: Vec<Label>,
    pub num_states: usize,
    pub nfa_states: usize,
    /// Probability that a given (label, state) pair has a rule.
    pub rule_density: f64,
    /// State names are `<prefix><i>`.
    pub prefix: String,
}

impl AutomatonShape {
    pub fn new(labels: Vec<Label>, num_states: usize, nfa_states: usize) -> Self {
        AutomatonShape {
            labels,
            num_states,
            nfa_states,
            rule_density: 0.5,
            prefix: "q".into(),
        }
    }

    pub fn prefix(mut self, prefix: &str) -> Self {
        self.prefix = prefix.into();
        self
    }
}

/// A random normalized automaton. Every label gets at least one rule and at
/// least one state is final.
pub fn random_automaton(rng: &mut ChaCha8Rng, shape: &AutomatonShape) -> HedgeAutomaton {
    let qs: Vec<State> = (0..shape.num_states.max(1))
        .map(|i| State::from(format!("{}{i}", shape.prefix)))
        .collect();
    let mut a = HedgeAutomaton::new("random");
    for l in &shape.labels {
        a.add_label(l.clone());
    }
    for q in &qs {
        a.add_state(q.clone());
    }
    for l in &shape.labels {
        let forced = rng.random_range(0..qs.len());
        for (i, q) in qs.iter().enumerate() {
            if i != forced && !rng.random_bool(shape.rule_density) {
                continue;
            }
            let n = rng.random_range(1..=shape.nfa_states.max(1));
            let mut nfa = random_nfa(rng, &qs, n, false);
            // Leaves must be possible somewhere or the language is empty.
            if rng.random_bool(0.5) {
                nfa = nfa.union(&HorizontalNfa::epsilon()).epsilon_eliminate();
                nfa.extend_alphabet(qs.iter().cloned());
            }
            a.add_rule(l.clone(), q.clone(), nfa);
        }
    }
    for q in &qs {
        if rng.random_bool(0.4) {
            a.add_final(q.clone());
        }
    }
    if a.finals().is_empty() {
        a.add_final(qs[0].clone());
    }
    a
}

/// A random tree with exactly `size` nodes.
pub fn random_tree(rng: &mut ChaCha8Rng, labels: &[Label], size: usize) -> Tree {
    let label = labels.choose(rng).expect("non-empty alphabet").clone();
    let mut remaining = size.max(1) - 1;
    let mut children = Vec::new();
    while remaining > 0 {
        let k = rng.random_range(1..=remaining);
        children.push(random_tree(rng, labels, k));
        remaining -= k;
    }
    Tree::new(label, children)
}

/// A random rule of the given kind. `labels` supplies targets and new
/// labels, `type_states` the inserted types.
pub fn random_rule(rng: &mut ChaCha8Rng, kind: UpdateKind, labels: &[Label], type_states: &[State]) -> UpdateRule {
    let a = labels.choose(rng).expect("non-empty alphabet").clone();
    match kind {
        UpdateKind::Ren => {
            let b = labels.choose(rng).expect("non-empty alphabet").clone();
            UpdateRule::ren(a, b)
        }
        UpdateKind::Del => UpdateRule::del(a),
        _ => UpdateRule::with_type(kind, a, type_states.choose(rng).expect("type states").clone()),
    }
}

/// Distinct labels of a tree set.
pub fn labels_of<'a>(trees: impl IntoIterator<Item = &'a Tree>) -> BTreeSet<Label> {
    trees.into_iter().flat_map(|t| t.labels()).collect()
}

/// A randomized instance for comparing symbolic Post with the concrete
/// semantics.
#[derive(Clone, Debug)]
pub struct OracleCase {
    pub seed: u64,
    pub doc: HedgeAutomaton,
    pub script: UpdateScript,
}

/// Limits for [`compare_with_oracle`].
#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    /// Post trees are compared up to this many nodes.
    pub post_bound: usize,
    /// Largest source tree tried when a script can shrink trees.
    pub max_source_bound: usize,
    /// Give up raising the source bound past this many source trees.
    pub max_sources: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            post_bound: 6,
            max_source_bound: 10,
            max_sources: 20_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    /// Equal sets. Sources up to `source_bound` nodes were enumerated;
    /// `searched` trees were matched by a targeted source search instead.
    Equal { source_bound: usize, trees: usize, searched: usize },
    /// A concrete result the automaton rejects.
    Unsound(Tree),
    /// An accepted tree no source within the limits rewrites to.
    Incomplete(Tree),
}

pub const DOC_LABELS: [&str; 3] = ["a", "b", "c"];
pub const TYPE_LABELS: [&str; 2] = ["b", "d"];

/// Draws whose document language has more trees than this within the post
/// bound are rejected, as are types with more instances than
/// `MAX_CASE_INSTANCES`. Both keep the concrete side enumerable.
pub const MAX_CASE_TREES: usize = 400;
pub const MAX_CASE_INSTANCES: usize = 24;

/// Draws a document automaton, a types automaton and a script of the given
/// kinds. Returns `None` when the draw is degenerate: an empty language, no
/// target in any small document, or no instance for an inserted type.
pub fn oracle_case(seed: u64, kinds: &[UpdateKind], post_bound: usize) -> Option<OracleCase> {
    let mut rng = rng(seed);
    let doc_labels = labels(&DOC_LABELS);
    let type_labels = labels(&TYPE_LABELS);
    let all_labels: Vec<Label> = doc_labels.iter().chain(&type_labels).cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut doc_shape = AutomatonShape::new(doc_labels.clone(), rng.random_range(2..=4), 3);
    doc_shape.rule_density = 0.35;
    let doc = random_automaton(&mut rng, &doc_shape);
    let mut type_shape = AutomatonShape::new(type_labels, 2, 2).prefix("p");
    type_shape.rule_density = 0.6;
    let types = random_automaton(&mut rng, &type_shape);
    let type_states: Vec<State> = types.states().iter().cloned().collect();
    let rules: Vec<UpdateRule> = kinds
        .iter()
        .map(|k| random_rule(&mut rng, *k, &all_labels, &type_states))
        .collect();
    let script = UpdateScript::new(types.clone(), rules).ok()?;

    let small = crate::algebra::enumerate(&doc, post_bound);
    if small.len() > MAX_CASE_TREES {
        return None;
    }
    let first = &script.rules()[0];
    let hit = small.iter().any(|t| !crate::rewrite::targets(t, first).is_empty());
    if !hit {
        return None;
    }
    let pool = crate::rewrite::InstancePool::for_script(&script, post_bound);
    let sizes: Vec<usize> = script.type_states().iter().map(|p| pool.instances(p).len()).collect();
    if sizes.iter().any(|n| *n == 0 || *n > MAX_CASE_INSTANCES) {
        return None;
    }
    Some(OracleCase { seed, doc, script })
}

/// Compares `{t ∈ L(post) : |t| ≤ post_bound}` with the concrete results of
/// the script on small source documents.
///
/// Inserted instances have at most `post_bound` nodes, enough for any
/// result within the bound. Sources of at most `post_bound` nodes suffice
/// when no rule shrinks trees; otherwise deleted or replaced subtrees may be
/// larger, and the source bound is raised until the sets agree. Every
/// concrete result is checked against the automaton at every bound.
pub fn compare_with_oracle(case: &OracleCase, limits: &OracleLimits) -> crate::error::Result<OracleOutcome> {
    use crate::algebra::enumerate;
    use crate::rewrite::{apply_script_with, InstancePool};

    let post = crate::post::post_script(&case.doc, &case.script)?;
    let expected = enumerate(&post, limits.post_bound);
    let pool = InstancePool::for_script(&case.script, limits.post_bound);
    let shrinks = case.script.rules().iter().any(|r| !r.kind().is_monotone());
    let max_bound = if shrinks { limits.max_source_bound } else { limits.post_bound };

    let mut seen: BTreeSet<Tree> = BTreeSet::new();
    let mut bound = 0;
    let mut layer = enumerate(&case.doc, limits.post_bound);
    while bound < max_bound {
        bound += 1;
        if bound > limits.post_bound {
            layer = enumerate(&case.doc, bound);
            if layer.len() > limits.max_sources {
                bound -= 1;
                break;
            }
        }
        for t in layer.iter().filter(|t| t.size() == bound) {
            for out in apply_script_with(t, &case.script, &pool, Some(limits.post_bound))? {
                if !post.accepts(&out) {
                    return Ok(OracleOutcome::Unsound(out));
                }
                seen.insert(out);
            }
        }
        if bound >= limits.post_bound && seen == expected {
            return Ok(OracleOutcome::Equal {
                source_bound: bound,
                trees: seen.len(),
                searched: 0,
            });
        }
    }
    let mut searched = 0;
    for t in expected.difference(&seen) {
        match find_source(case, t, &pool)? {
            Some(_) => searched += 1,
            None => return Ok(OracleOutcome::Incomplete(t.clone())),
        }
    }
    Ok(OracleOutcome::Equal {
        source_bound: bound,
        trees: expected.len(),
        searched,
    })
}

/// Most replaced subtrees a preimage search swaps back.
pub const MAX_RESTORED: usize = 5;

/// Looks for a source document that a single deletion or replacement rule
/// rewrites to `target`. Deleted subtrees are restored between children;
/// replaced instances are swapped back for subtrees of the rewritten label.
/// Restored subtrees are the smallest of each evaluation class. A candidate
/// counts only if running the rule on it yields `target`.
pub fn find_source(
    case: &OracleCase,
    target: &Tree,
    pool: &crate::rewrite::InstancePool,
) -> crate::error::Result<Option<Tree>> {
    let [rule] = case.script.rules() else {
        return Ok(None);
    };
    let label = rule.target();
    let mut classes: BTreeSet<BTreeSet<State>> = BTreeSet::new();
    let mut reps: Vec<Tree> = Vec::new();
    let universe = crate::algebra::Universe::build(&case.doc, REP_BOUND);
    for (t, states) in universe.trees() {
        if t.label() == label && classes.insert(states.clone()) {
            reps.push(t.clone());
        }
    }
    let check = |source: &Tree| -> crate::error::Result<bool> {
        Ok(case.doc.accepts(source) && crate::rewrite::parallel_step(source, rule, pool)?.contains(target))
    };
    match rule.kind() {
        UpdateKind::Del => {
            let classes: Vec<(BTreeSet<State>, Tree)> = reps
                .iter()
                .map(|r| (case.doc.evaluate(r).states, r.clone()))
                .collect();
            let options = undelete(&case.doc, target, label, &classes, true);
            for (states, source) in options {
                if states.iter().any(|q| case.doc.finals().contains(q)) && check(&source)? {
                    return Ok(Some(source));
                }
            }
            Ok(None)
        }
        UpdateKind::Rpl => {
            let p = rule.type_state().expect("typed rule");
            let positions: Vec<crate::tree::Position> = target
                .positions()
                .into_iter()
                .filter(|pos| {
                    let sub = target.get(pos).expect("own position");
                    case.script.types().evaluate(sub).states.contains(p)
                })
                .collect();
            let n = positions.len().min(12);
            for mask in 1u32..(1 << n) {
                let chosen: Vec<&crate::tree::Position> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| &positions[i]).collect();
                let nested = chosen
                    .iter()
                    .any(|a| chosen.iter().any(|b| a != b && a.is_prefix_of(b)));
                if nested || chosen.len() > MAX_RESTORED {
                    continue;
                }
                if let Some(t) = swap_back(target, &chosen, &reps, 0, &check)? {
                    return Ok(Some(t));
                }
            }
            Ok(None)
        }
        _ => Ok(None),
    }
}

const REP_BOUND: usize = 7;

// Sources of `t` under deletion of `label`, one per evaluation class: the
// children of every node may be interleaved with any number of deleted
// subtrees, taken from `deleted`.
fn undelete(
    a: &HedgeAutomaton,
    t: &Tree,
    label: &Label,
    deleted: &[(BTreeSet<State>, Tree)],
    root: bool,
) -> BTreeMap<BTreeSet<State>, Tree> {
    let mut out = BTreeMap::new();
    if t.label() == label && !root {
        return out;
    }
    let rules: Vec<(&State, &HorizontalNfa)> = a.rules_for(t.label()).collect();
    let children: Vec<BTreeMap<BTreeSet<State>, Tree>> =
        t.children().iter().map(|c| undelete(a, c, label, deleted, false)).collect();
    type Config = Vec<BTreeSet<usize>>;
    let step = |config: &Config, states: &BTreeSet<State>| -> Config {
        rules
            .iter()
            .zip(config)
            .map(|((_, nfa), cur)| nfa.step(cur, |x| states.contains(x)))
            .collect()
    };
    let mut layer: BTreeMap<Config, Vec<Tree>> = BTreeMap::new();
    layer.insert(rules.iter().map(|(_, nfa)| nfa.start_set()).collect(), Vec::new());
    for i in 0..=children.len() {
        // Close under inserting deleted subtrees, fewest insertions first.
        let mut queue: std::collections::VecDeque<Config> = layer.keys().cloned().collect();
        while let Some(config) = queue.pop_front() {
            let hedge = layer[&config].clone();
            for (states, r) in deleted {
                let next = step(&config, states);
                if let std::collections::btree_map::Entry::Vacant(e) = layer.entry(next.clone()) {
                    let mut h = hedge.clone();
                    h.push(r.clone());
                    e.insert(h);
                    queue.push_back(next);
                }
            }
        }
        let Some(child) = children.get(i) else { break };
        let mut next_layer: BTreeMap<Config, Vec<Tree>> = BTreeMap::new();
        for (config, hedge) in &layer {
            for (states, c) in child {
                next_layer.entry(step(config, states)).or_insert_with(|| {
                    let mut h = hedge.clone();
                    h.push(c.clone());
                    h
                });
            }
        }
        layer = next_layer;
    }
    for (config, hedge) in layer {
        let states: BTreeSet<State> = rules
            .iter()
            .zip(&config)
            .filter(|((_, nfa), cur)| cur.iter().any(|s| nfa.is_final(*s)))
            .map(|((q, _), _)| (*q).clone())
            .collect();
        if !states.is_empty() {
            out.entry(states).or_insert_with(|| Tree::new(t.label().clone(), hedge));
        }
    }
    out
}

fn swap_back(
    current: &Tree,
    chosen: &[&crate::tree::Position],
    reps: &[Tree],
    i: usize,
    check: &impl Fn(&Tree) -> crate::error::Result<bool>,
) -> crate::error::Result<Option<Tree>> {
    if i == chosen.len() {
        return Ok(if check(current)? { Some(current.clone()) } else { None });
    }
    for r in reps {
        let next = current
            .replace_at(chosen[i], crate::tree::Hedge::single(r.clone()))
            .expect("positions of the target");
        if let Some(t) = swap_back(&next, chosen, reps, i + 1, check)? {
            return Ok(Some(t));
        }
    }
    Ok(None)
}
