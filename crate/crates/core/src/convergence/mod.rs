//! Computable diagnostics for weak, Wijsman and Hausdorff set convergence,
//! and for locally uniform convergence of coefficient fields defined on
//! varying domains.
//!
//! Everything is grid-estimated over compact probe sets; 1-Lipschitz signed
//! distances bound the estimation error by the grid resolution.

mod gaps;
mod sequence;

pub use gaps::{
    compact_containment_index, exceptional_set_condition_b, field_convergence_gap,
    hausdorff_distance, monotone_implies_weak, wijsman_gap, wijsman_gap_saturated,
    weak_convergence_gap, weak_convergence_gap_saturated, MonotoneDirection, MonotoneReport,
    WijsmanTarget,
};
pub use sequence::{DomainSequence, FieldEval, FieldKind, FieldSequence, SeqDomain};

use crate::geometry::GeometryError;
use crate::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("sequence is not monotone at index {index} near {point:?}")]
    NotMonotone { index: u32, point: Vec<f64> },
    #[error("operation requires polyhedral members")]
    NotPolyhedral,
    #[error("no member point found within the search radius of probe {probe:?}")]
    ProjectionFailed { probe: Vec<f64> },
    #[error("no usable probes for the requested diagnostic")]
    InsufficientProbes,
    #[error("containment index not found within max index {max_index}")]
    ContainmentNotFound { max_index: u32 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}
