use thiserror::Error;

/// Errors produced by solvers, averaging operators and the experiment harness.
#[derive(Debug, Error)]
pub enum EfaError {
    /// Bad user-facing configuration: unknown coefficient names, malformed
    /// config files, CFL violations detected before a run starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// A precondition on operator inputs was violated (non-uniform sample
    /// grid, averaging window not covered by samples, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Explicit time stepping produced a non-finite value.
    #[error("instability: non-finite value at step {step} (t = {t})")]
    Instability { step: usize, t: f64 },

    /// A linear solve that must be uniquely solvable was singular.
    #[error("degenerate linear system: {0}")]
    Degenerate(String),

    /// Input left the mathematical domain of an operation (e.g. a
    /// non-positive coefficient sample inside a harmonic mean).
    #[error("domain error: {0}")]
    Domain(String),

    /// Slope regression had fewer than the required usable points.
    #[error("regression error: {0}")]
    Regression(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EfaError>;
