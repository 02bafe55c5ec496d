use thiserror::Error;

use crate::mdd::Value;

/// Errors raised while building, combining or parsing diagrams.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MddError {
    #[error("tuple {index} has {found} values, expected {expected}")]
    TupleArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("tuple {index}: value {value} is not in the domain of variable {var}")]
    ValueOutOfDomain {
        index: usize,
        var: usize,
        value: Value,
    },
    #[error("diagrams disagree on variables or domains")]
    DomainMismatch,
    #[error("edge limit of {limit} exceeded during construction")]
    EdgeLimit { limit: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid diagram: {0}")]
    Invalid(String),
}

impl MddError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        MddError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Errors raised by a propagator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagatorError {
    #[error("constraint has failed")]
    Failed,
    #[error("no open phase to backtrack")]
    NoOpenPhase,
    #[error("variable {0} is out of range")]
    VariableOutOfRange(usize),
    #[error("value {value} is not in the current domain of variable {var}")]
    ValueNotInDomain { var: usize, value: Value },
    #[error("no live edge {src} -> {dst} labelled {value}")]
    NoSuchEdge {
        src: usize,
        dst: usize,
        value: Value,
    },
    #[error("domains do not match the diagram: {0}")]
    BadDomains(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

/// Errors raised while reading CSP instances or running a search.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Mdd(#[from] MddError),
    #[error(transparent)]
    Propagator(#[from] PropagatorError),
    #[error("malformed instance: {0}")]
    Invalid(String),
}

impl InstanceError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        InstanceError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Errors raised by the brute-force reference implementations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {size} assignments exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u128 },
}
