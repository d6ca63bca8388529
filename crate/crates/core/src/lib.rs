//! Hedge automata over unranked trees, the parallel semantics of
//! XQuery-Update-style primitives, and the symbolic Post construction used
//! to check that a document adaptation lands inside a target schema.

pub mod algebra;
pub mod automaton;
pub mod error;
pub mod frontend;
pub mod nfa;
pub mod post;
pub mod regex;
pub mod rewrite;
pub mod state;
pub mod testkit;
pub mod tree;

pub use automaton::{normalize, state_hygiene, Computation, HedgeAutomaton};
pub use error::{Error, Location, Result};
pub use nfa::HorizontalNfa;
pub use regex::Regex;
pub use state::{FreshNames, State};
pub use tree::{Hedge, Label, Position, Tree};
pub use post::{post_script, post_script_with, InsIntoMode, PostContext};
pub use rewrite::{
    apply_script, parallel_step, parallel_step_traced, post_oracle, targets, InstancePool, UpdateKind, UpdateRule, UpdateScript,
};
