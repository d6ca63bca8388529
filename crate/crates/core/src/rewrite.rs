//! Concrete semantics of the update primitives: one maximal parallel
//! rewriting step per rule, folded over a script.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::{enumerate, Universe};
use crate::automaton::HedgeAutomaton;
use crate::error::{Error, Result};
use crate::state::State;
use crate::tree::{Label, Position, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UpdateKind {
    Ren,
    Rpl,
    Del,
    InsFirst,
    InsLast,
    InsInto,
    InsBefore,
    InsAfter,
}

impl UpdateKind {
    pub const ALL: [UpdateKind; 8] = [
        UpdateKind::Ren,
        UpdateKind::Rpl,
        UpdateKind::Del,
        UpdateKind::InsFirst,
        UpdateKind::InsLast,
        UpdateKind::InsInto,
        UpdateKind::InsBefore,
        UpdateKind::InsAfter,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            UpdateKind::Ren => "ren",
            UpdateKind::Rpl => "rpl",
            UpdateKind::Del => "del",
            UpdateKind::InsFirst => "ins_first",
            UpdateKind::InsLast => "ins_last",
            UpdateKind::InsInto => "ins_into",
            UpdateKind::InsBefore => "ins_before",
            UpdateKind::InsAfter => "ins_after",
        }
    }

    pub fn from_keyword(s: &str) -> Option<UpdateKind> {
        UpdateKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn needs_type_state(self) -> bool {
        !matches!(self, UpdateKind::Ren | UpdateKind::Del)
    }

    /// Kinds that never rewrite the root.
    pub fn excludes_root(self) -> bool {
        matches!(self, UpdateKind::Del | UpdateKind::InsBefore | UpdateKind::InsAfter)
    }

    /// Kinds under which a tree never shrinks.
    pub fn is_monotone(self) -> bool {
        !matches!(self, UpdateKind::Del | UpdateKind::Rpl)
    }
}

impl fmt::Display for UpdateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpdateRule {
    kind: UpdateKind,
    target: Label,
    new_label: Option<Label>,
    type_state: Option<State>,
}

impl UpdateRule {
    pub fn ren(a: Label, b: Label) -> Self {
        UpdateRule {
            kind: UpdateKind::Ren,
            target: a,
            new_label: Some(b),
            type_state: None,
        }
    }

    pub fn del(a: Label) -> Self {
        UpdateRule {
            kind: UpdateKind::Del,
            target: a,
            new_label: None,
            type_state: None,
        }
    }

    /// A rule of one of the kinds carrying a type state.
    ///
    /// # Panics
    /// If `kind` is `Ren` or `Del`.
    pub fn with_type(kind: UpdateKind, a: Label, p: State) -> Self {
        assert!(kind.needs_type_state(), "{kind} takes no type state");
        UpdateRule {
            kind,
            target: a,
            new_label: None,
            type_state: Some(p),
        }
    }

    pub fn rpl(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::Rpl, a, p)
    }

    pub fn ins_first(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::InsFirst, a, p)
    }

    pub fn ins_last(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::InsLast, a, p)
    }

    pub fn ins_into(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::InsInto, a, p)
    }

    pub fn ins_before(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::InsBefore, a, p)
    }

    pub fn ins_after(a: Label, p: State) -> Self {
        Self::with_type(UpdateKind::InsAfter, a, p)
    }

    pub fn kind(&self) -> UpdateKind {
        self.kind
    }

    pub fn target(&self) -> &Label {
        &self.target
    }

    pub fn new_label(&self) -> Option<&Label> {
        self.new_label.as_ref()
    }

    pub fn type_state(&self) -> Option<&State> {
        self.type_state.as_ref()
    }

    pub(crate) fn with_kind(&self, kind: UpdateKind) -> UpdateRule {
        UpdateRule {
            kind,
            ..self.clone()
        }
    }
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.new_label, &self.type_state) {
            (Some(b), _) => write!(f, "{} {} -> {}", self.kind, self.target, b),
            (None, Some(p)) => write!(f, "{} {} <- {}", self.kind, self.target, p),
            (None, None) => write!(f, "{} {}", self.kind, self.target),
        }
    }
}

/// An ordered sequence of rules whose type states belong to `types`.
#[derive(Clone, Debug)]
pub struct UpdateScript {
    rules: Vec<UpdateRule>,
    types: HedgeAutomaton,
}

impl UpdateScript {
    pub fn new(types: HedgeAutomaton, rules: Vec<UpdateRule>) -> Result<Self> {
        for r in &rules {
            if let Some(p) = r.type_state() {
                if !types.states().contains(p) {
                    return Err(Error::UnknownTypeState(p.clone()));
                }
            }
        }
        Ok(UpdateScript { rules, types })
    }

    pub fn rules(&self) -> &[UpdateRule] {
        &self.rules
    }

    pub fn types(&self) -> &HedgeAutomaton {
        &self.types
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn type_states(&self) -> BTreeSet<State> {
        self.rules.iter().filter_map(|r| r.type_state().cloned()).collect()
    }
}

impl fmt::Display for UpdateScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Positions matching `r`, in ascending lexicographic order. The root is
/// left out for the kinds that would turn it into a hedge.
pub fn targets(t: &Tree, r: &UpdateRule) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|p| !(p.is_root() && r.kind.excludes_root()))
        .filter(|p| t.get(p).is_some_and(|n| n.label() == &r.target))
        .collect()
}

/// Candidate instances for type states, drawn from a bounded enumeration
/// of the types automaton.
#[derive(Clone, Debug, Default)]
pub struct InstancePool {
    instances: BTreeMap<State, Vec<Tree>>,
}

impl InstancePool {
    /// All trees of at most `bound` nodes evaluating to each state of
    /// `states` in `types`.
    pub fn build(types: &HedgeAutomaton, states: impl IntoIterator<Item = State>, bound: usize) -> Self {
        let universe = Universe::build(types, bound);
        let instances = states
            .into_iter()
            .map(|p| {
                let trees = universe.evaluating_to(&p).cloned().collect();
                (p, trees)
            })
            .collect();
        InstancePool { instances }
    }

    pub fn for_script(script: &UpdateScript, bound: usize) -> Self {
        Self::build(script.types(), script.type_states(), bound)
    }

    pub fn from_instances(instances: impl IntoIterator<Item = (State, Vec<Tree>)>) -> Self {
        InstancePool {
            instances: instances.into_iter().collect(),
        }
    }

    pub fn instances(&self, p: &State) -> &[Tree] {
        self.instances.get(p).map(Vec::as_slice).unwrap_or(&[])
    }
}

// One way of rewriting a single target: the inserted instance, if any, and
// the child slot for insertion into the children.
fn choices<'a>(t: &Tree, p: &Position, r: &UpdateRule, pool: &'a InstancePool) -> Vec<(Option<&'a Tree>, usize)> {
    let instances: Vec<Option<&Tree>> = match r.type_state() {
        Some(q) => pool.instances(q).iter().map(Some).collect(),
        None => vec![None],
    };
    let slots = match r.kind {
        UpdateKind::InsInto => t.get(p).map_or(1, |n| n.children().len() + 1),
        _ => 1,
    };
    instances
        .into_iter()
        .flat_map(|u| (0..slots).map(move |i| (u, i)))
        .collect()
}

fn apply_at(tree: &mut Tree, p: &Position, r: &UpdateRule, u: Option<&Tree>, slot: usize) {
    let instance = || u.expect("kind carries an instance").clone();
    match r.kind {
        UpdateKind::Ren => {
            let node = tree.get_mut(p).expect("target in tree");
            node.set_label(r.new_label.clone().expect("ren has a new label"));
        }
        UpdateKind::InsFirst => tree.get_mut(p).expect("target in tree").children_mut().insert(0, instance()),
        UpdateKind::InsLast => tree.get_mut(p).expect("target in tree").children_mut().push(instance()),
        UpdateKind::InsInto => tree.get_mut(p).expect("target in tree").children_mut().insert(slot, instance()),
        UpdateKind::Rpl if p.is_root() => *tree = instance(),
        UpdateKind::Rpl | UpdateKind::Del | UpdateKind::InsBefore | UpdateKind::InsAfter => {
            let parent = p.parent().expect("non-root target");
            let i = *p.path().last().expect("non-root target") - 1;
            let siblings = tree.get_mut(&parent).expect("target in tree").children_mut();
            match r.kind {
                UpdateKind::Rpl => siblings[i] = instance(),
                UpdateKind::Del => {
                    siblings.remove(i);
                }
                UpdateKind::InsBefore => siblings.insert(i, instance()),
                _ => siblings.insert(i + 1, instance()),
            }
        }
    }
}

/// All results of one maximal parallel application of `r` to `t`.
pub fn parallel_step(t: &Tree, r: &UpdateRule, pool: &InstancePool) -> Result<BTreeSet<Tree>> {
    parallel_step_capped(t, r, pool, None)
}

/// As [`parallel_step`], keeping only results of at most `cap` nodes. For
/// kinds that never shrink a tree, oversized partial results are dropped
/// early.
pub fn parallel_step_capped(t: &Tree, r: &UpdateRule, pool: &InstancePool, cap: Option<usize>) -> Result<BTreeSet<Tree>> {
    let positions = targets(t, r);
    if positions.is_empty() {
        return Ok(BTreeSet::from([t.clone()]));
    }
    if let Some(q) = r.type_state() {
        if pool.instances(q).is_empty() {
            return Err(Error::EmptyPool(q.clone()));
        }
    }
    // A node below a replaced or deleted target vanishes with it, so only
    // the outermost targets affect the result.
    let positions: Vec<Position> = if matches!(r.kind, UpdateKind::Rpl | UpdateKind::Del) {
        let mut kept: Vec<Position> = Vec::new();
        for p in positions {
            if !kept.last().is_some_and(|k| k.is_prefix_of(&p)) {
                kept.push(p);
            }
        }
        kept
    } else {
        positions
    };
    // How far the targets not yet rewritten can still shrink the tree.
    let smallest = r
        .type_state()
        .and_then(|q| pool.instances(q).iter().map(Tree::size).min())
        .unwrap_or(0);
    let mut shrink: Vec<usize> = positions
        .iter()
        .map(|p| match r.kind {
            UpdateKind::Rpl | UpdateKind::Del => t.get(p).map_or(0, |n| n.size().saturating_sub(smallest)),
            _ => 0,
        })
        .collect();
    let mut pending: usize = shrink.iter().sum();
    let mut current = BTreeSet::from([t.clone()]);
    for p in positions.iter().rev() {
        pending -= shrink.pop().unwrap_or(0);
        let mut next = BTreeSet::new();
        for tree in &current {
            for (u, slot) in choices(tree, p, r, pool) {
                let mut out = tree.clone();
                apply_at(&mut out, p, r, u, slot);
                if cap.is_some_and(|c| out.size().saturating_sub(pending) > c) {
                    continue;
                }
                next.insert(out);
            }
        }
        current = next;
    }
    if let Some(c) = cap {
        current.retain(|t| t.size() <= c);
    }
    Ok(current)
}

/// Applies `r` at every target in decreasing lexicographic order, letting
/// `pick` choose the instance and slot at each target. Returns the tree
/// after each application.
pub fn parallel_step_traced(
    t: &Tree,
    r: &UpdateRule,
    mut pick: impl FnMut(&Position, &Tree) -> (Option<Tree>, usize),
) -> Vec<(Position, Tree)> {
    let mut tree = t.clone();
    let mut trace = Vec::new();
    for p in targets(t, r).iter().rev() {
        let (u, slot) = pick(p, &tree);
        apply_at(&mut tree, p, r, u.as_ref(), slot);
        trace.push((p.clone(), tree.clone()));
    }
    trace
}

/// Folds [`parallel_step`] over the script, with pools built once at
/// `pool_bound`.
pub fn apply_script(t: &Tree, script: &UpdateScript, pool_bound: usize) -> Result<BTreeSet<Tree>> {
    let pool = InstancePool::for_script(script, pool_bound);
    apply_script_with(t, script, &pool, None)
}

pub fn apply_script_with(t: &Tree, script: &UpdateScript, pool: &InstancePool, cap: Option<usize>) -> Result<BTreeSet<Tree>> {
    let mut current = BTreeSet::from([t.clone()]);
    for (i, r) in script.rules().iter().enumerate() {
        // Pruning mid-script is sound only if nothing later can shrink a tree.
        let rest_monotone = script.rules()[i..].iter().all(|r| r.kind.is_monotone());
        let step_cap = if rest_monotone || i + 1 == script.rules().len() { cap } else { None };
        let mut next = BTreeSet::new();
        for tree in &current {
            next.extend(parallel_step_capped(tree, r, pool, step_cap)?);
        }
        current = next;
    }
    if let Some(c) = cap {
        current.retain(|t| t.size() <= c);
    }
    Ok(current)
}

/// Bounds for [`post_oracle_with`].
#[derive(Clone, Copy, Debug)]
pub struct OracleBounds {
    /// Largest source document considered.
    pub tree_bound: usize,
    /// Largest instance inserted for a type state.
    pub pool_bound: usize,
    /// Results larger than this are discarded.
    pub size_cap: Option<usize>,
}

/// The finite slice of Post: every result of the script on every member of
/// `L(a_l)` with at most `tree_bound` nodes.
pub fn post_oracle(a_l: &HedgeAutomaton, script: &UpdateScript, tree_bound: usize, pool_bound: usize) -> Result<BTreeSet<Tree>> {
    post_oracle_with(
        a_l,
        script,
        &OracleBounds {
            tree_bound,
            pool_bound,
            size_cap: None,
        },
    )
}

pub fn post_oracle_with(a_l: &HedgeAutomaton, script: &UpdateScript, bounds: &OracleBounds) -> Result<BTreeSet<Tree>> {
    let pool = InstancePool::for_script(script, bounds.pool_bound);
    let mut out = BTreeSet::new();
    for t in enumerate(a_l, bounds.tree_bound) {
        out.extend(apply_script_with(&t, script, &pool, bounds.size_cap)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    fn l(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn pool(p: &str, trees: &[&str]) -> InstancePool {
        InstancePool::from_instances([(State::from(p), trees.iter().map(|s| t(s)).collect())])
    }

    #[test]
    fn targets_follow_lex_order_and_root_exclusion() {
        let p = State::from("p");
        let after = UpdateRule::ins_after(l("c"), p.clone());
        let pos: Vec<String> = targets(&t("b(c,d(c(a),a))"), &after).iter().map(|p| p.to_string()).collect();
        assert_eq!(pos, ["1", "2.1"]);
        assert!(targets(&t("a"), &UpdateRule::del(l("a"))).is_empty());
        let first = UpdateRule::ins_first(l("a"), p);
        let pos: Vec<String> = targets(&t("a(a(b,c),b)"), &first).iter().map(|p| p.to_string()).collect();
        assert_eq!(pos, ["ε", "1"]);
    }

    #[test]
    fn insert_first_is_parallel_not_sequential() {
        let r = UpdateRule::ins_first(l("a"), State::from("p"));
        let out = parallel_step(&t("a(a(b,c),b)"), &r, &pool("p", &["d(e)"])).unwrap();
        assert_eq!(out, BTreeSet::from([t("a(d(e),a(d(e),b,c),b)")]));
    }

    #[test]
    fn insert_into_offers_every_slot() {
        let r = UpdateRule::ins_into(l("a"), State::from("p"));
        let out = parallel_step(&t("a(b,c)"), &r, &pool("p", &["d"])).unwrap();
        assert_eq!(out, BTreeSet::from([t("a(d,b,c)"), t("a(b,d,c)"), t("a(b,c,d)")]));
    }

    #[test]
    fn nested_deletion_removes_descendant_targets() {
        let out = parallel_step(&t("b(a(a),c)"), &UpdateRule::del(l("a")), &InstancePool::default()).unwrap();
        assert_eq!(out, BTreeSet::from([t("b(c)")]));
    }

    #[test]
    fn replace_at_root_is_allowed() {
        let out = parallel_step(&t("a(b)"), &UpdateRule::rpl(l("a"), State::from("p")), &pool("p", &["d", "d(e)"])).unwrap();
        assert_eq!(out, BTreeSet::from([t("d"), t("d(e)")]));
    }

    #[test]
    fn empty_pool_is_an_error_only_with_targets() {
        let r = UpdateRule::ins_last(l("a"), State::from("p"));
        let empty = InstancePool::default();
        assert!(matches!(parallel_step(&t("a"), &r, &empty), Err(Error::EmptyPool(_))));
        assert_eq!(parallel_step(&t("b"), &r, &empty).unwrap(), BTreeSet::from([t("b")]));
    }
}
