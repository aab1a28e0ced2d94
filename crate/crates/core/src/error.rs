//! Library error types.

use std::fmt;

/// Errors produced by the design and decoding routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// Tree expression syntax error at a byte offset into the input.
    TreeSyntax { position: usize, message: String },
    /// alist parse or consistency failure.
    Alist(AlistError),
    /// Random graph construction failure.
    Generation(String),
    /// Decoder spec file parse failure.
    SpecFormat { line: usize, message: String },
    /// A stored table disagrees with the alphabets it is used with.
    CorruptSpec(String),
    /// Probability mass drifted beyond tolerance during density evolution.
    NumericalDrift { iteration: usize, detail: String },
    /// Density evolution already fails at the lower end of the bisection interval.
    IntervalTooHigh { sigma_min: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::TreeSyntax { position, message } => {
                write!(f, "tree syntax error at byte {position}: {message}")
            }
            Error::Alist(e) => write!(f, "alist error: {e}"),
            Error::Generation(msg) => write!(f, "graph generation failed: {msg}"),
            Error::SpecFormat { line, message } => {
                write!(f, "decoder spec parse error at line {line}: {message}")
            }
            Error::CorruptSpec(msg) => write!(f, "corrupt decoder spec: {msg}"),
            Error::NumericalDrift { iteration, detail } => {
                write!(f, "numerical drift at iteration {iteration}: {detail}")
            }
            Error::IntervalTooHigh { sigma_min } => write!(
                f,
                "density evolution does not converge even at sigma_min = {sigma_min}; \
                 the search interval lies above the threshold"
            ),
        }
    }
}

impl std::error::Error for Error {}

/// Structured alist failures; each maps to a distinct malformed-input class.
#[derive(Debug, Clone, PartialEq)]
pub enum AlistError {
    /// Token-level problem (missing fields, non-numeric data).
    Malformed { line: usize, message: String },
    /// A node index outside `1..=max`.
    IndexOutOfRange { line: usize, value: usize, max: usize },
    /// The same edge listed twice on one adjacency line.
    DuplicateEdge { vn: usize, cn: usize },
    /// Edge present in one adjacency half but not the other.
    InconsistentHalves { vn: usize, cn: usize },
    /// Declared degree disagrees with the listed neighbors.
    DegreeMismatch {
        node: &'static str,
        index: usize,
        declared: usize,
        actual: usize,
    },
}

impl fmt::Display for AlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlistError::Malformed { line, message } => write!(f, "line {line}: {message}"),
            AlistError::IndexOutOfRange { line, value, max } => {
                write!(f, "line {line}: index {value} outside 1..={max}")
            }
            AlistError::DuplicateEdge { vn, cn } => {
                write!(f, "edge (vn {vn}, cn {cn}) listed more than once")
            }
            AlistError::InconsistentHalves { vn, cn } => write!(
                f,
                "edge (vn {vn}, cn {cn}) present in one adjacency half only"
            ),
            AlistError::DegreeMismatch {
                node,
                index,
                declared,
                actual,
            } => write!(
                f,
                "{node} {index}: declared degree {declared}, found {actual} neighbors"
            ),
        }
    }
}

impl From<AlistError> for Error {
    fn from(e: AlistError) -> Self {
        Error::Alist(e)
    }
}

/// Shorthand used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
