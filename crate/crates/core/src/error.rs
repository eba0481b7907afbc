use thiserror::Error;

/// Errors raised by the library. Checked property failures are never errors;
/// they are carried inside reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("relation is not a partial order: cycle through {0:?}")]
    PartialOrderViolation(Vec<String>),
    #[error("{0} is not strictly below {1}")]
    NotComparable(String, String),
    #[error("poset is not bounded")]
    NotBounded,
    #[error("truncation caps differ ({0} vs {1})")]
    CapMismatch(usize, usize),
    #[error("homology degree {degree} out of range (computable degrees are 0 to {max})")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("empty simplicial set")]
    EmptyComplex,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("flows cannot be joined: {0}")]
    NotJoinable(String),
    #[error("malformed flow: {0}")]
    MalformedFlow(String),
    #[error("not a full directed ball: {0}")]
    NotABall(String),
    #[error("state order is not strict: cycle through {0:?}")]
    NotLoopless(Vec<String>),
    #[error("word budget of {budget} exceeded at level {level} on pair ({source_state}, {target_state})")]
    BudgetExceeded {
        budget: usize,
        level: usize,
        source_state: String,
        target_state: String,
    },
    #[error("link {0} of the chain is not injective")]
    NotAnInclusion(usize),
    #[error("malformed subdivision: {0}")]
    MalformedSubdivision(String),
    #[error("malformed morphism: {0}")]
    MalformedMorphism(String),
    #[error("invalid simplicial data: {0}")]
    InvalidSimplicial(String),
    #[error("{line}:{column}: {kind}: {message}")]
    Parse {
        line: usize,
        column: usize,
        kind: ParseErrorKind,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    DuplicateIdentifier,
    DanglingReference,
    ArityMismatch,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::DuplicateIdentifier => "duplicate identifier",
            ParseErrorKind::DanglingReference => "dangling reference",
            ParseErrorKind::ArityMismatch => "arity mismatch",
        };
        f.write_str(s)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
