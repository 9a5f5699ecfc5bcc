use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),

    /// The truncated state lost more norm than the requested tolerance.
    #[error("truncation at cutoff {cutoff} keeps norm {norm:.3e} (tolerance {tolerance:.1e})")]
    Truncation {
        cutoff: usize,
        norm: f64,
        tolerance: f64,
    },

    #[error("state norm {0} is outside [1 - tol, 1]")]
    NotNormalized(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("n̄ = {n_bar} exceeds the Fock oracle ceiling of {ceiling}; use the analytic moments instead")]
    OracleCeiling { n_bar: f64, ceiling: f64 },

    #[error("phase is unobservable: |d⟨Q⟩/dθ| = {slope:.3e} is below the detection floor")]
    UnobservablePhase { slope: f64 },

    #[error("displacement is unobservable: dη/dr = {d_eta_dr:.3e} at r = {r:.4e} m")]
    UnobservableDisplacement { r: f64, d_eta_dr: f64 },

    #[error("plate gap must be positive, got {0:.4e} m")]
    NonPositiveGap(f64),

    #[error("n̄ grid spans {decades:.2} decades, need at least {required}")]
    GridTooNarrow { decades: f64, required: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
