//! Monte Carlo harness: path-functional batteries, two-sample distances, and
//! the theorem-level convergence experiments with hypothesis gating.

mod distance;
mod experiment;
mod functionals;
mod report;

pub use distance::{
    energy_distance, ks_per_coordinate, ks_statistic, two_sample_distance, DistanceError,
    DistanceKind,
};
pub use experiment::{
    default_indices, run_experiment, run_theorem21_experiment, run_theorem32_experiment,
    run_theorem52_experiment, run_theorem53_experiment, DecayKind, DiagnosticsSpec,
    ExperimentSpec, Functional, HarnessError, LimitKind, RunParams, Theorem32Setup,
    Theorem52Setup, Theorem53Setup,
};
pub use functionals::{path_functionals, path_functionals_with, PathFunctionals};
pub use report::{
    ConvergenceReport, ExperimentOutput, FunctionalSamples, HypothesisReport, IndexReport,
    SampleRow, Verdict,
};
