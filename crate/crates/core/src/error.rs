//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the learners, the saddle solver and the meta layer.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Vector lengths disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A loss entry exceeds the declared per-expert range.
    #[error("loss scale violated at index {index}: |{value}| > {bound}")]
    ScaleViolation {
        index: usize,
        value: f64,
        bound: f64,
    },

    /// Invalid scale profile: bad prior, non-positive scale, length issues.
    #[error("invalid scale profile: {0}")]
    InvalidProfile(String),

    /// Bound computation would overflow (4 c^2 n / pi beyond the float range).
    #[error("sizing error: {0}")]
    Sizing(String),

    /// The exact small-instance solver only handles up to 6 experts.
    #[error("exact saddle solver limited to N <= 6, got N = {n}")]
    ExactSolverSize { n: usize },

    /// NaN or infinite coefficients reached the solver.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// The saddle solver could not certify the requested gap. Carries the
    /// best iterate found and its certified optimality gap.
    #[error("saddle solver stalled with certified gap {gap}")]
    SolverStalled { best: Vec<f64>, gap: f64 },

    /// An error raised inside a game round, tagged with the round index.
    #[error("round {round}: {source}")]
    InRound {
        round: usize,
        #[source]
        source: Box<CoreError>,
    },

    /// A sub-algorithm broke its declared range (Assumption 1/2 breach).
    #[error("handle {handle} violated its declared range: |{value}| > {bound}")]
    AssumptionViolated {
        handle: usize,
        value: f64,
        bound: f64,
    },

    /// Configuration problems: losses not evaluable at 0, bad regularizer
    /// exponents, empty handle lists, and similar.
    #[error("configuration error: {0}")]
    Config(String),

    /// The kernel Gram operator turned out indefinite.
    #[error("kernel is not positive definite (witness eigenvalue {min_eigenvalue})")]
    KernelNotPd { min_eigenvalue: f64 },

    /// Projection target set is empty for the requested parameters.
    #[error("infeasible projection: {0}")]
    InfeasibleProjection(String),
}

impl CoreError {
    /// Wrap an error with the round it occurred in.
    pub fn in_round(self, round: usize) -> CoreError {
        CoreError::InRound {
            round,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
