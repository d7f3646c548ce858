//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by layout construction, capacity evaluation, the solvers
/// and the run driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A grid or layout description is unusable (empty, duplicate points,
    /// non-positive spacing, wrong arity, ...).
    #[error("invalid array spec: {0}")]
    InvalidSpec(String),

    /// Minimum spacing is undefined for layouts with fewer than two points.
    #[error("minimum spacing undefined: layout has fewer than 2 points")]
    UndefinedSpacing,

    /// A link scenario violates its invariants (non-positive SNR,
    /// non-increasing distances, inconsistent quantization, ...).
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Selection weights outside [0, 1] or with the wrong sum.
    #[error("invalid selection weights: {0}")]
    InvalidWeights(String),

    /// Requested selection size does not fit the candidate grid.
    #[error("target sum {target} out of range for vector of length {len}")]
    TargetSumOutOfRange { target: usize, len: usize },

    /// A selection index points outside its candidate grid.
    #[error("index {index} out of range for grid of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// Exhaustive search refused: the combination count exceeds the budget.
    #[error(
        "exhaustive search budget exceeded: estimated {estimate} capacity \
         evaluations > budget {budget} (pass force to run anyway)"
    )]
    BudgetExceeded { estimate: u128, budget: u128 },

    /// A run configuration failed validation; lists every violated field.
    #[error("invalid config:\n  {}", violations.join("\n  "))]
    InvalidConfig { violations: Vec<String> },

    /// I/O failure while reading configs or writing outputs.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
