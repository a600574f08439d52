use thiserror::Error;

use crate::model::EventId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid variable {var}: {reason}")]
    InvalidVariable { var: usize, reason: String },

    #[error("invalid event {event}: {reason}")]
    InvalidEvent { event: EventId, reason: String },

    #[error("unknown event id {0}")]
    UnknownEvent(EventId),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("support too large for exact probability: event {event} has {joint_values} joint values (cap {cap})")]
    SupportTooLarge {
        event: EventId,
        joint_values: u128,
        cap: u128,
    },

    #[error("neighborhood too large for exact independence polynomial: {size} vertices (cap {cap})")]
    NeighborhoodTooLarge { size: usize, cap: usize },

    #[error("invalid parameter vector: {0}")]
    InvalidParameters(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("step index {t} out of range for log of length {len}")]
    StepOutOfRange { t: usize, len: usize },

    #[error("enumeration produced more than {cap} trees")]
    TooManyTrees { cap: usize },

    #[error("rejection subprocess exceeded {limit} restarts")]
    RejectionLimit { limit: u64 },

    #[error("generator infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A parse failure with the 1-based line it was detected on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error("duplicate header")]
    DuplicateHeader,
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange { literal: i64, num_vars: usize },
    #[error("tautological clause: variable {0} appears with both signs")]
    Tautology(usize),
    #[error("duplicate literal {0} in clause")]
    DuplicateLiteral(i64),
    #[error("empty clause")]
    EmptyClause,
    #[error("unterminated clause at end of input")]
    UnterminatedClause,
    #[error("header declares {declared} clauses but {found} were found")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("{what} {value} exceeds the limit of {max}")]
    TooLarge {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("vertex {vertex} out of range for {num_vertices} vertices")]
    VertexOutOfRange { vertex: usize, num_vertices: usize },
    #[error("edge has {0} vertices; at least 2 required")]
    EdgeTooSmall(usize),
    #[error("vertex {0} repeated within an edge")]
    RepeatedVertex(usize),
    #[error("duplicate edge")]
    DuplicateEdge,
    #[error("invalid value {0:?}")]
    InvalidValue(String),
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
}
