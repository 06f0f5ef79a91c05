use thiserror::Error;

use crate::bdd::Node;
use crate::expr::MAX_CONDITIONS;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty expression")]
    EmptyInput,

    /// `position` is a byte offset into the source text.
    #[error("syntax error at {position}: expected {expected}")]
    Syntax { position: usize, expected: String },

    #[error("decision has {count} conditions, at most {} are supported", MAX_CONDITIONS)]
    TooManyConditions { count: usize },

    #[error("input vector has {got} values, decision has {expected} conditions")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{0} has in-degree below 2 and is not a pseudo-terminal")]
    NotAPseudoTerminal(Node),

    #[error("record for {got} conditions cannot be accumulated into a {expected}-condition accumulator")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("accumulators belong to different decisions")]
    IncompatibleAccumulators,

    #[error("line {line}: unexpected token `{token}`")]
    BadToken { line: usize, token: String },

    #[error("line {line}: expected {expected} values, got {got}")]
    WrongArity { line: usize, expected: usize, got: usize },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),
}
