use thiserror::Error;

/// Errors produced by the configuration-model toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The degree sequence has no half-edges (N = 0) where N ≥ 1 is needed.
    #[error("degenerate degree sequence: total degree is zero")]
    Degenerate,

    #[error("degree sequence is empty")]
    Empty,

    /// Odd total degree; no configuration exists.
    #[error("degree sum {sum} is odd; no configuration exists")]
    OddSum { sum: u64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("vertex {index} has degree {degree} and cannot be split")]
    NotSplittable { index: usize, degree: u32 },

    /// Exhaustive enumeration refused because the instance is too large.
    #[error("enumeration cap exceeded: {edges} edges > limit of {cap} edges")]
    CapExceeded { edges: u64, cap: u64 },

    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    /// An internal cross-check failed. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
