use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GdsError {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("pure-state boundary: symplectic eigenvalue {kappa} is not above 1/2")]
    PureStateBoundary { kappa: f64 },

    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },

    #[error("no stationary state: drift is not Hurwitz (spectral abscissa {abscissa:e})")]
    NoStationaryState { abscissa: f64 },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("audit failed: {0}")]
    AuditFailed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration failed: {reason} (max residual {residual:e})")]
    Integration { reason: String, residual: f64 },

    #[error("Fock space of dimension {dim} exceeds the budget of {budget}")]
    CutoffBudget { dim: usize, budget: usize },

    #[error("trace drifted by {drift:e}; cutoff is too small")]
    TraceDrift { drift: f64 },
}

pub type Result<T> = std::result::Result<T, GdsError>;
