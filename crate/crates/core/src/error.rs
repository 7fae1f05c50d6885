use std::fmt;

use thiserror::Error;

use crate::term::Word;

/// A validation finding attached to the identifier it concerns.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown place `{0}`")]
    UnknownPlace(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("term at {path}: boundary mismatch, expected {expected} but found {found}")]
    BoundaryMismatch { path: String, expected: Word, found: Word },
    #[error("term at {path}: unknown generator `{id}`")]
    UnknownGenerator { path: String, id: String },
    #[error("arity mismatch: expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("color `{color}` is not in the color set of place `{place}`")]
    ColorMismatch { place: String, color: String },
    #[error("invalid permutation: {0}")]
    Permutation(String),
    #[error("invalid net: {}", join_diagnostics(.0))]
    InvalidNet(Vec<Diagnostic>),
    #[error("invalid guard: {}", join_diagnostics(.0))]
    InvalidGuard(Vec<Diagnostic>),
    #[error("net too large for isomorphism search: {places} places exceeds the cap of {cap}")]
    TooLarge { places: usize, cap: usize },
    #[error("isomorphism search exceeded its budget of {0} nodes")]
    SearchBudget(usize),
    #[error("operation needs a guarded net, but the guard is `none`")]
    Unguarded,
    #[error("guard kinds differ: {0} vs {1}")]
    GuardKindMismatch(&'static str, &'static str),
    #[error("invalid functor: {0}")]
    InvalidFunctor(String),
    #[error("not a morphism of guarded nets: {0}")]
    NotAMorphism(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("invalid bundle: {}", join_diagnostics(.0))]
    InvalidBundle(Vec<Diagnostic>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
