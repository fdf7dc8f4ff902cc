//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Failure modes of the nanotube force pipeline.
#[derive(Debug, thiserror::Error)]
pub enum NanoError {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input violates a structural assumption of the model
    /// (for example a non-metallic zigzag index).
    #[error("model assumption violated: {0}")]
    ModelAssumption(String),

    /// The Fermi distribution degenerates at zero temperature and zero
    /// chemical potential, so the intraband weight is undefined.
    #[error("degenerate distribution: chemical potential is zero at zero temperature")]
    DegenerateDistribution,

    /// `sin(2 α̃ L)` vanishes, so the Sturm–Liouville Green function has a pole.
    #[error("internal resonance at omega = {omega:.6e} rad/s (alpha*L = {alpha_l})")]
    InternalResonance {
        /// Angular frequency in rad/s (0 when unknown at the call site).
        omega: f64,
        /// Dimensionless product α̃·L.
        alpha_l: num_complex::Complex64,
    },

    /// Division by a vanishing quantity.
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// The requested point is a genuine singularity of the function.
    #[error("singular point: {0}")]
    SingularPoint(String),

    /// A truncated spectral integral did not meet its tail tolerance.
    #[error("spectral truncation error {estimate:.3e}; try h_max >= {suggested_h_max:.3e} 1/m")]
    Truncation {
        /// Estimated relative size of the discarded tail.
        estimate: f64,
        /// A larger cut-off that should satisfy the tolerance.
        suggested_h_max: f64,
    },

    /// A principal-value limit failed to settle.
    #[error("regularization failed: {0}")]
    Regularization(String),

    /// The collocation matrix is singular or too ill-conditioned to trust.
    #[error("resonance or discretization failure: condition estimate {condition:.3e}")]
    IllConditioned {
        /// Estimated 1-norm condition number.
        condition: f64,
    },

    /// A denominator of the closed-form force expression vanishes.
    #[error("analytic force singular: {0}")]
    AnalyticSingularity(String),

    /// Malformed configuration document.
    #[error("configuration error: {0}")]
    Config(String),

    /// Emit was called on a result with no rows.
    #[error("sweep result has no rows")]
    EmptyResult,

    /// File-system failure with the offending path attached.
    #[error("I/O error on {path}: {source}")]
    Io {
        /// Path being read or written.
        path: PathBuf,
        /// Underlying error.
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, NanoError>;
