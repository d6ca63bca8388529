//! Boolean operations and decision procedures on hedge automata.

mod determinize;
mod emptiness;
mod enumerate;
mod product;

use std::collections::BTreeSet;

pub use determinize::{
    complement, complement_with, determinize, determinize_over, Determinized, Limits, DEFAULT_STATE_BUDGET,
};
pub use emptiness::{is_empty, minimal_sizes, minimal_trees, productive_states};
pub use enumerate::{enumerate, enumerate_state, Universe};
pub use product::{intersect, intersect_with_pairs, union};

use crate::automaton::HedgeAutomaton;
use crate::error::Result;
use crate::tree::Tree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionVerdict {
    pub holds: bool,
    /// Accepted by the left automaton and rejected by the right one.
    pub counterexample: Option<Tree>,
}

/// Decides `L(a) ⊆ L(b)` by emptiness of `L(a) ∩ complement(L(b))`.
pub fn included(a: &HedgeAutomaton, b: &HedgeAutomaton) -> Result<InclusionVerdict> {
    included_with(a, b, &Limits::default())
}

pub fn included_with(a: &HedgeAutomaton, b: &HedgeAutomaton, limits: &Limits) -> Result<InclusionVerdict> {
    let sigma: BTreeSet<_> = a.alphabet().union(b.alphabet()).cloned().collect();
    let not_b = complement_with(b, &sigma, limits)?;
    limits.check_deadline()?;
    let witness = is_empty(&intersect(a, &not_b));
    Ok(InclusionVerdict {
        holds: witness.is_none(),
        counterexample: witness,
    })
}

/// Language equality, by inclusion both ways.
pub fn equivalent(a: &HedgeAutomaton, b: &HedgeAutomaton) -> Result<bool> {
    Ok(included(a, b)?.holds && included(b, a)?.holds)
}
