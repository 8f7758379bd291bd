//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model parameters or dimensions.
    #[error("configuration error: {0}")]
    Config(String),

    /// A dense tensor allocation would exceed the memory budget.
    #[error(
        "capacity error: dense tensor needs {requested_bytes} bytes, budget is \
         {budget_bytes} bytes; use the virtual backend instead"
    )]
    Capacity {
        requested_bytes: u64,
        budget_bytes: u64,
    },

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// An AMP iterate left the finite floats. Carries the overlap trace up to
    /// the failing iteration.
    #[error("AMP diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        trace: crate::amp::AmpTrace,
    },
}
