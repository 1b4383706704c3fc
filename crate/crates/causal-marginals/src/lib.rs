//! Toolkit for marginal scenarios on finite variable sets: hypergraph acyclicity
//! and triangulation, conditional-independence structures of Bayesian networks and
//! Markov random fields, exact gluing of compatible marginal distributions, and
//! derivation of Bell-type inequality systems (probabilistic and entropic) by exact
//! rational polyhedral projection.
//!
//! All polyhedral computation is exact (arbitrary-precision rationals). Entropies
//! are evaluated in floating point; independence and zero tests are done exactly on
//! the underlying tables.

pub mod catalog;
pub mod causal;
pub mod corr_polytope;
pub mod distributions;
pub mod entropy_cone;
pub mod hypergraph;
pub mod par;
pub mod pipeline;
pub mod polyhedra;
pub mod vars;

use thiserror::Error;

/// Crate-wide error type.
///
/// Guard violations and constraint-combination rejections are separated from
/// plain invalid input because callers (the CLI in particular) map them to
/// distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Structurally invalid input (bad labels, unknown nodes, malformed systems).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A configurable size guard was exceeded.
    #[error("guard exceeded: {what} is {actual}, limit {limit}")]
    GuardExceeded {
        /// Which guard tripped.
        what: &'static str,
        /// Observed size.
        actual: usize,
        /// Configured limit.
        limit: usize,
    },
    /// Numerically inconsistent input, e.g. marginal tables that disagree on a
    /// shared sub-marginal or probabilities that do not sum to one.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    /// Scenario-derived and causal-structure-derived constraint sets cannot be
    /// combined soundly for this input.
    #[error("cannot combine constraint sets: {0}")]
    IncompatibleConstraints(String),
    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
