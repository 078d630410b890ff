//! Error types shared by every transform module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SaftError>;

/// Everything that can go wrong while building parameter sets or running a
/// transform. Variants that describe numerical failures carry enough context
/// to name the offending cell or tolerance in diagnostics.
#[derive(Debug, Clone, Error)]
pub enum SaftError {
    #[error("matrix is not unimodular: |AD - BC - 1| = {defect:.3e} exceeds 1e-12")]
    NotUnimodular { defect: f64 },

    #[error("B must be nonzero (B = 0 degenerates the transform to a chirp multiplication)")]
    DegenerateB,

    #[error("{kind} requires complex matrix entries, which are not supported")]
    ComplexEntriesUnsupported { kind: &'static str },

    #[error("invalid signal: {reason}")]
    InvalidSignal { reason: String },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error(
        "sampling step {actual_dt:.6e} violates the chirp guard (need dt <= {required_dt:.6e}){at}",
        at = cell.as_ref().map(|c| format!(" at {c}")).unwrap_or_default()
    )]
    NyquistViolation {
        required_dt: f64,
        actual_dt: f64,
        cell: Option<String>,
    },

    #[error("omega grid incompatible with the chirp-FFT path: {reason}")]
    GridMismatch { reason: String },

    #[error("scale must be strictly positive (got {scale})")]
    NonpositiveScale { scale: f64 },

    #[error("wavelet must be L2-normalized (|norm - 1| = {defect:.3e} exceeds 1e-9)")]
    NotNormalized { defect: f64 },

    #[error("second moment does not converge on the truncation window (tail fraction {tail:.3e})")]
    DivergentMoment { tail: f64 },

    #[error("lattice index ({j}, {k}) outside the frame specification")]
    IndexOutOfRange { j: i64, k: i64 },

    #[error("iteration did not converge within {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("frame is ill-conditioned: lower bound estimate {lower:.3e} is numerically zero")]
    IllConditionedFrame { lower: f64 },

    #[error("closed form is singular: {reason}")]
    SingularDenominator { reason: String },

    #[error("summand decay too slow: tail terms are {tail:.3e} of the partial sum (limit 1e-3)")]
    SlowDecay { tail: f64 },

    #[error("adaptive quadrature did not converge after {levels} refinement levels")]
    NoConvergence { levels: usize },

    #[error("parse error at {location}: {reason}")]
    ParseError { location: String, reason: String },

    #[error("time column is not uniformly spaced at row {row} (step {found}, expected {expected})")]
    NonuniformGrid { row: usize, found: f64, expected: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SaftError {
    fn from(e: std::io::Error) -> Self {
        SaftError::Io(e.to_string())
    }
}

impl SaftError {
    /// True for errors caused by bad configuration or unparsable input, as
    /// opposed to numerical failures discovered while computing.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            SaftError::NotUnimodular { .. }
                | SaftError::DegenerateB
                | SaftError::ComplexEntriesUnsupported { .. }
                | SaftError::InvalidSignal { .. }
                | SaftError::InvalidGrid { .. }
                | SaftError::ParseError { .. }
                | SaftError::NonuniformGrid { .. }
                | SaftError::Io(_)
        )
    }
}
