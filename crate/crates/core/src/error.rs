use thiserror::Error;

/// Errors raised by the model, allocation and control routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("matrix is not antisymmetric (max asymmetry {0:e})")]
    NotAntisymmetric(f64),
    #[error("matrix is not a rotation (orthogonality error {orthogonality:e}, det {det})")]
    NotRotation { orthogonality: f64, det: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("inertia matrix is singular or not positive definite")]
    SingularInertia,
    #[error("invalid morphology: {0}")]
    InvalidMorphology(String),
    #[error("pair (A, B) is not stabilizable: {0}")]
    NotStabilizable(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
