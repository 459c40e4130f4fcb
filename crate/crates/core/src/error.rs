//! Error types shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of lattice, weight, and spectral operations.
///
/// Construction errors are fatal; numerical ones carry enough context to
/// adjust the offending parameter and retry.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Basis determinant below the conditioning floor relative to column norms.
    #[error("singular basis: |det| = {det:.6e} is below the conditioning floor")]
    SingularBasis { det: f64 },

    /// Point enumeration would visit more candidates than the configured cap.
    #[error("enumeration candidate count {candidates} exceeds cap {cap}")]
    CapacityExceeded { candidates: u128, cap: u128 },

    /// A nonzero lattice point projects to (numerically) zero in physical space.
    #[error("physical projection is not injective on the lattice: witness z = {witness:?}")]
    InjectivityFailed { witness: Vec<i64> },

    /// The weight function violates its claimed decay certificate.
    #[error("weight function is not admissible: {reason}")]
    NotAdmissible { reason: String },

    /// Operation requires a continuous weight; sharp windows only enter density counts.
    #[error("operation requires a continuous weight function; sharp windows are only supported on the density path")]
    NonSmoothWeight,

    /// Grid refinement did not settle below the requested tolerance.
    #[error("quadrature did not converge: {context}")]
    QuadratureNotConverged { context: String },

    /// Almost-period search box contains no lattice candidate.
    #[error("no almost-period candidates inside the search box; enlarge it or relax eps")]
    NoCandidatesInRange,

    /// Precondition violation on a user-supplied argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable code, used by the CLI error JSON and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularBasis { .. } => "singular_basis",
            Error::CapacityExceeded { .. } => "capacity_exceeded",
            Error::InjectivityFailed { .. } => "injectivity_failed",
            Error::NotAdmissible { .. } => "not_admissible",
            Error::NonSmoothWeight => "non_smooth_weight",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::NoCandidatesInRange => "no_candidates_in_range",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}
