use std::fmt;

use thiserror::Error;

/// 1-based line/column position in formula or F-expression source.
#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, Hash)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: expected dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("map left the space at iteration index {index}: {detail}")]
    LeftSpace { index: usize, detail: String },

    #[error("parameter `{name}` = {value} out of range: {expected}")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("insufficient data: need a sequence of length {required}, have {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("index out of range: [{a}, {b}] not within 1..={len}")]
    IndexOutOfRange { a: usize, b: usize, len: usize },

    #[error("operation needs a {expected} map, got {found}")]
    MapKind {
        expected: &'static str,
        found: String,
    },

    #[error("syntax error at {position}: {message}")]
    Syntax { position: Position, message: String },

    #[error("unbound variable `{name}` at {position}")]
    UnboundVariable { name: String, position: Position },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("F is undefined at n = {0}")]
    FUndefined(usize),

    #[error("arithmetic overflow evaluating F at n = {0}")]
    FOverflow(usize),

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter {
            name,
            value,
            expected,
        })
    }
}
