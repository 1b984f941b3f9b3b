//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by geometry preparation, local solves, network evaluation,
/// training, and time integration.
#[derive(Debug, Error)]
pub enum Error {
    /// Spatial dimensions of two inputs disagree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// Array shapes of two inputs disagree.
    #[error("shape mismatch in {context}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },

    /// A target point has no source point within the support radius.
    #[error("target point {target} has no neighbors within the support radius")]
    EmptyNeighborhood { target: usize },

    /// The local least-squares problem cannot determine the polynomial
    /// coefficients from the available samples.
    #[error(
        "local problem at target {target} is not unisolvent: \
         {neighbors} neighbors for {required} basis terms"
    )]
    Unisolvency {
        target: usize,
        neighbors: usize,
        required: usize,
    },

    /// A neighbor sits on the kernel support boundary, where the weight
    /// function has a kink and position derivatives are undefined.
    #[error(
        "target {target}: neighbor at distance {radius:.6e} lies within \
         {tolerance:.1e} of the support boundary {epsilon:.6e}"
    )]
    KernelBoundary {
        target: usize,
        radius: f64,
        epsilon: f64,
        tolerance: f64,
    },

    /// The weight kernel is not smooth enough for position differentiation.
    #[error("position gradients need kernel power >= 2, got {power}")]
    KernelNotSmooth { power: u32 },

    /// A value that must be finite was not.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// Invalid construction arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}, batch {batch}: loss is not finite")]
    TrainingDiverged { epoch: usize, batch: usize },

    /// The implicit system could not be factorized.
    #[error("singular implicit system (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    /// An operation that requires a linear functional map got a nonlinear one.
    #[error("operation requires a linear functional map: {context}")]
    NonlinearMap { context: &'static str },

    /// Forward-pass cache required by a backward pass is missing or stale.
    #[error("gradient tape is missing or stale: {context}")]
    StaleTape { context: &'static str },

    /// I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// File contents do not match the expected format.
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Checkpoint or other JSON document violates its schema.
    #[error("schema error: {0}")]
    Schema(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
