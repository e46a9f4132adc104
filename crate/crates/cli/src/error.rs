//! CLI error type: everything maps to exit 1 with a structured JSON payload
//! on stderr.

use serde_json::json;
use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Geometry(#[from] reflectolab_core::geometry::GeometryError),
    #[error("{0}")]
    Model(#[from] reflectolab_core::model::ModelError),
    #[error("{0}")]
    Convergence(#[from] reflectolab_core::convergence::ConvergenceError),
    #[error("{0}")]
    Sim(#[from] reflectolab_core::sim::EnsembleError),
    #[error("{0}")]
    Harness(#[from] reflectolab_core::harness::HarnessError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn config(e: ConfigError) -> Self {
        Self::Config(e)
    }

    pub fn io(e: std::io::Error) -> Self {
        Self::Io(e)
    }

    pub fn geometry(e: reflectolab_core::geometry::GeometryError) -> Self {
        Self::Geometry(e)
    }

    pub fn model(e: reflectolab_core::model::ModelError) -> Self {
        Self::Model(e)
    }

    pub fn convergence(e: reflectolab_core::convergence::ConvergenceError) -> Self {
        Self::Convergence(e)
    }

    pub fn sim(e: reflectolab_core::sim::EnsembleError) -> Self {
        Self::Sim(e)
    }

    pub fn harness(e: reflectolab_core::harness::HarnessError) -> Self {
        Self::Harness(e)
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self::Internal(e.to_string())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Geometry(_) => "geometry",
            CliError::Model(_) => "model",
            CliError::Convergence(_) => "convergence",
            CliError::Sim(_) => "simulation",
            CliError::Harness(_) => "harness",
            CliError::Internal(_) => "internal",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
