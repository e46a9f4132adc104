//! Discretized reflected diffusions: Euler proposals, exact one-step
//! Skorokhod corrections (LCP for polyhedra, oblique rays for smooth
//! boundaries), local-time tracking, exceptional-set stopping, and seeded
//! parallel ensembles.

mod correction;
mod ensemble;
pub mod io;
mod path;
pub mod rng;

pub use correction::{
    oblique_correction_smooth, skorokhod_map_1d, skorokhod_step_polyhedron, PolyhedralStepper,
    StepCorrection,
};
pub use ensemble::{simulate_ensemble, simulate_ensemble_map, EnsembleError};
pub use path::{simulate_path, PathSample, SimOptions, Simulator};

use crate::geometry::GeometryError;
use crate::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("LCP contraction precondition violated: rho(I - N R) = {rho}")]
    ContractionViolated { rho: f64 },
    #[error("projected Gauss-Seidel did not converge within {sweeps} sweeps")]
    SolverDiverged { sweeps: usize },
    #[error("reflection ray misses the boundary (outward or tangential field)")]
    RayMisses,
    #[error("ray correction still exterior after {iterations} re-projections")]
    IterationCap { iterations: usize },
    #[error("start point lies outside the domain closure")]
    StartOutsideDomain,
    #[error("domain/reflection combination is not supported by this stepper")]
    UnsupportedDomain,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<SimError> },
}

impl SimError {
    /// Attach the step index at which a propagated error occurred.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            SimError::AtStep { .. } => self,
            other => SimError::AtStep { step, source: Box::new(other) },
        }
    }
}
