use alloc::string::String;
use core::fmt;

/// Errors raised by the unranking core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An id referenced by a sample, pool, or request does not resolve.
    DanglingId { kind: &'static str, id: String },
    /// The same (query, document) pair was labelled twice.
    DuplicatePair { query: String, doc: String },
    /// A dataset invariant does not hold.
    Invalid(String),
    /// A configuration value is out of range or infeasible.
    Config(String),
    /// The data cannot support the requested training or unlearning step.
    Infeasible(String),
    /// Model and dataset disagree on vocabulary size, or a shape mismatch.
    Shape(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DanglingId { kind, id } => write!(f, "unknown {kind} id \"{id}\""),
            Error::DuplicatePair { query, doc } => {
                write!(f, "duplicate sample for pair ({query}, {doc})")
            }
            Error::Invalid(msg) => write!(f, "invalid dataset: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
