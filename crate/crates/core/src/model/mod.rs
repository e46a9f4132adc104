//! Diffusion coefficient fields, reflection fields with the r(z).n(z) = 1
//! normalization, and the corner-avoidance criterion for orthant SRBMs.

mod fields;
mod hitting;
mod matrix_ops;

pub use fields::{DiffusionSpec, MatrixField, ReflectionField, VectorField};
pub use hitting::{check_hitting_condition, normalize_reflection, HittingReport, ReflectionMatrix};
pub use matrix_ops::{psd_sqrt, spectral_radius};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is not positive definite (eigenvalue {eigenvalue})")]
    NotPD { eigenvalue: f64 },
    #[error("matrix must be square")]
    NotSquare,
    #[error("reflection vector is not inward pointing (r.n = {dot})")]
    NotInwardPointing { dot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hitting-condition hypotheses not met: {reason}")]
    HypothesesNotMet { reason: String },
    #[error("hitting-condition checker supports the orthant form only")]
    Unsupported,
}
