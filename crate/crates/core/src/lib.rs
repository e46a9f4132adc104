//! Numerical laboratory for obliquely reflected diffusions on converging
//! domains: exact signed-distance geometry, set-convergence diagnostics, a
//! discretized reflected Euler scheme with explicit local time, and a Monte
//! Carlo harness that measures distributional convergence of path
//! functionals.
//!
//! The numerical core is generic over the scalar type (see [`scalar::Scalar`]);
//! `f64` is the reference instantiation and the one used by the CLI.

pub mod convergence;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod sim;
pub mod linalg;
pub mod scalar;
pub mod tol;

pub use geometry::{BoundaryPoint, Domain, GeometryError, ProbeSet, Puncture, Region};
pub use scalar::Scalar;

/// Concrete `f64` aliases; the CLI and harness operate on these.
pub type Domain64 = Domain<f64>;
pub type BoundaryPoint64 = BoundaryPoint<f64>;
pub type ProbeSet64 = ProbeSet<f64>;
pub type Region64 = Region<f64>;

/// `f32` aliases for reduced-precision experimentation.
pub type Domain32 = Domain<f32>;
pub type BoundaryPoint32 = BoundaryPoint<f32>;
