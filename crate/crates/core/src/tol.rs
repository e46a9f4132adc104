//! Pinned numerical tolerances and solver limits, stated for `f64`.
//!
//! Generic code rescales them through [`crate::scalar::Scalar::tol`]; keeping
//! them in one place keeps magic numbers out of the algorithms.

/// Stored unit vectors (face normals, reflection directions) must have
/// Euclidean norm 1 within this.
pub const UNIT_NORM: f64 = 1e-12;

/// Matrix symmetry gate for covariance inputs.
pub const SYMMETRY: f64 = 1e-12;

/// Smallest admissible eigenvalue for a positive definite matrix.
pub const PD_MIN_EIG: f64 = 1e-12;

/// `normalize_reflection` rejects fields with r·n at or below this.
pub const INWARD_MIN: f64 = 1e-10;

/// Nearest-face ties (and active-set coincidences) within this are treated as
/// ambiguous projections.
pub const TIE: f64 = 1e-10;

/// |x - zeta(x)| must match |phi(x)| within this wherever zeta is defined.
pub const PROJECTION: f64 = 1e-10;

/// Frobenius accuracy of the symmetric square root reconstruction.
pub const PSD_SQRT: f64 = 1e-10;

/// Complementarity residual bound for the one-step Skorokhod LCP.
pub const LCP_RESIDUAL: f64 = 1e-10;

/// Sweep cap for the projected Gauss-Seidel LCP solver.
pub const LCP_MAX_SWEEPS: usize = 10_000;

/// Recorded states may undershoot the domain by at most this.
pub const FEASIBILITY: f64 = 1e-9;

/// Local time may only grow while the state is on the boundary within this.
pub const BOUNDARY_CONTACT: f64 = 1e-9;

/// Discrete reconstruction of the defining SDE must close within this.
pub const DECOMPOSITION_RESIDUAL: f64 = 1e-9;

/// Accuracy contract of `spectral_radius`.
pub const SPECTRAL_RADIUS: f64 = 1e-8;

/// Default stopping collar around the exceptional set V.
pub const EPS_V_DEFAULT: f64 = 1e-3;

/// Default time step and horizon of the Euler scheme.
pub const DT_DEFAULT: f64 = 1e-3;
pub const T_DEFAULT: f64 = 1.0;

/// Default probe-grid resolution; the 1-Lipschitz signed distance bounds
/// grid-estimation error of sup-gaps by this.
pub const GRID_H_DEFAULT: f64 = 0.01;

/// Matched-point search radius in `field_convergence_gap`, in units of the
/// probe resolution h.
pub const MATCH_RADIUS_FACTOR: f64 = 10.0;

/// A smooth-domain correction larger than this multiple of the step scale
/// sqrt(dt * |A|) triggers proposal subdivision.
pub const STEP_GUARD_FACTOR: f64 = 10.0;

/// Maximum number of proposal halvings (so at most 2^4 sub-steps).
pub const STEP_HALVING_MAX: u32 = 4;

/// Re-projection cap for the smooth-boundary ray correction.
pub const RAY_ITER_CAP: usize = 100;

/// Saturation threshold standing in for an infinite signed distance when the
/// limit domain is the whole space.
pub const SATURATION_DEFAULT: f64 = 1e3;

/// Modulus-of-continuity window used by the path-functional battery.
pub const MODULUS_DELTA: f64 = 0.01;
