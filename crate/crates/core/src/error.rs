use std::fmt;

use crate::state::State;
use crate::tree::{Label, Position};

/// Location of a syntax error in some input text (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn new(line: usize, column: usize) -> Self {
        Location { line, column }
    }

    /// Computes the location of byte offset `offset` in `text`.
    pub fn of_offset(text: &str, offset: usize) -> Self {
        let mut line = 1;
        let mut column = 1;
        for (i, ch) in text.char_indices() {
            if i >= offset {
                break;
            }
            if ch == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        Location { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid label `{0}`")]
    InvalidLabel(String),

    #[error("position {0} is not in the tree")]
    PositionNotInTree(Position),

    #[error("the root can only be replaced by exactly one tree, got a hedge of {0}")]
    RootReplacedByNonSingleton(usize),

    #[error("syntax error at {location}: {message}")]
    Syntax { location: Location, message: String },

    #[error("symbol `{0}` is not in the alphabet of the horizontal automaton")]
    SymbolNotInAlphabet(State),

    #[error("determinization exceeded the state budget of {budget} subset states")]
    StateBudgetExceeded { budget: usize },

    #[error("deadline exceeded")]
    DeadlineExceeded,

    #[error("alphabet is missing label `{0}` used by the automaton")]
    AlphabetMismatch(Label),

    #[error("no instance of type `{0}` within the pool bound")]
    EmptyPool(State),

    #[error("unknown type state `{0}`")]
    UnknownTypeState(State),

    #[error("undeclared element `{0}`")]
    UndeclaredElement(String),

    #[error("element `{0}` is declared twice")]
    DuplicateDeclaration(String),

    #[error("malformed XML at byte {position}: {message}")]
    Xml { position: u64, message: String },

    #[error("{0}")]
    Strict(String),
}

impl Error {
    pub(crate) fn syntax(text: &str, offset: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            location: Location::of_offset(text, offset),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent input text.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidLabel(_)
                | Error::Syntax { .. }
                | Error::UndeclaredElement(_)
                | Error::DuplicateDeclaration(_)
                | Error::Xml { .. }
                | Error::Strict(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
