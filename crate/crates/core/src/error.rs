use thiserror::Error;

/// Failure to load or validate a knowledge base.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed knowledge base document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid knowledge base: {0}")]
    Validation(String),
    #[error("invalid assignment: {0}")]
    Assignment(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown variable `{name}` at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("unknown value `{value}` for variable `{variable}` at offset {pos}")]
    UnknownValue {
        variable: String,
        value: String,
        pos: usize,
    },
    #[error("variable `{name}` is not a t/f variable; write `{name}=<value>` (offset {pos})")]
    NotBinary { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    /// The evidence has zero probability mass, so the conditional is undefined.
    #[error("evidence `{evidence}` has zero probability")]
    ZeroEvidence { evidence: String },
    #[error("oracle does not accept negative literals: {0}")]
    Capability(String),
    #[error("ill-formed single-variable query: {0}")]
    InvalidQuery(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("conditional is undefined: evidence `{evidence}` has zero probability")]
    UndefinedConditional { evidence: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("oracle returned inconsistent probabilities (raw result {0})")]
    Inconsistent(f64),
    #[error("call bound m * 2^q overflows for m = {m}, q = {q}")]
    BoundOverflow { m: u64, q: u32 },
    #[error("{0}")]
    InvalidArgument(String),
}
