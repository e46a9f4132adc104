//! Run manifests: enough to re-run any result from scratch.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_path: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Wall time of the run; excluded from the byte-reproducibility contract.
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_path: &str, config_bytes: &[u8]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(config_bytes);
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_path: config_path.to_string(),
            config_sha256: format!("{:x}", hasher.finalize()),
            seed: None,
            threads: None,
            wall_time_seconds: 0.0,
            outputs: Vec::new(),
        }
    }
}
