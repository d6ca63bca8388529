use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// A vertical automaton state, identified by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(Arc<str>);

impl State {
    pub fn new(name: impl AsRef<str>) -> Self {
        State(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True if the name can be written in the native automaton format.
    pub fn is_token(&self) -> bool {
        !self.0.is_empty() && self.0.chars().all(crate::tree::is_token_char) && &*self.0 != "eps"
    }
}

impl From<&str> for State {
    fn from(s: &str) -> Self {
        State::new(s)
    }
}

impl From<String> for State {
    fn from(s: String) -> Self {
        State(Arc::from(s))
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Generates state names that never collide with a set of reserved names or
/// with anything generated earlier.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    used: BTreeSet<State>,
    counter: u64,
}

impl FreshNames {
    pub fn new(reserved: impl IntoIterator<Item = State>) -> Self {
        FreshNames {
            used: reserved.into_iter().collect(),
            counter: 0,
        }
    }

    pub fn reserve(&mut self, names: impl IntoIterator<Item = State>) {
        self.used.extend(names);
    }

    /// A new name of the form `<base>.f<n>`.
    pub fn fresh(&mut self, base: &State) -> State {
        loop {
            self.counter += 1;
            let candidate = State::from(format!("{}.f{}", base, self.counter));
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    pub fn is_used(&self, s: &State) -> bool {
        self.used.contains(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_avoid_reserved_and_each_other() {
        let q = State::from("q");
        let mut fresh = FreshNames::new([q.clone(), State::from("q.f1")]);
        let a = fresh.fresh(&q);
        let b = fresh.fresh(&q);
        assert_ne!(a, b);
        assert_ne!(a.as_str(), "q.f1");
        assert!(a.is_token() && b.is_token());
    }
}
