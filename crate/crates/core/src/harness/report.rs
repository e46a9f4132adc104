//! Serializable experiment reports. Field order and BTreeMap keys make the
//! JSON byte stream a pure function of the inputs.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Hypothesis diagnostics and distance trend both passed.
    Pass,
    /// Simulation ran but distances did not settle into the noise band.
    Fail,
    /// Hypothesis diagnostics failed; the experiment refused to claim
    /// anything about the conclusion.
    Refused,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub passed: bool,
    /// Names of diagnostics that failed to shrink.
    pub failed: Vec<String>,
    /// Diagnostic values along the index ladder, keyed by diagnostic name.
    pub values: BTreeMap<String, Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub n: u32,
    /// False when every member path stopped at the exceptional set, leaving
    /// no law to compare (distances are then omitted).
    pub usable: bool,
    /// Functional-wise two-sample distances to the limit ensemble.
    pub distances: BTreeMap<String, f64>,
    pub in_band: BTreeMap<String, bool>,
    /// Fraction of member paths stopped at the exceptional set (excluded
    /// from the samples; a nonvanishing fraction is itself a red flag).
    pub stopped_fraction: f64,
    /// Fraction of member paths that accumulated any local time.
    pub positive_local_time_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub theorem: String,
    pub base_seed: u64,
    pub n_paths: u64,
    pub horizon: f64,
    pub dt: f64,
    pub indices: Vec<u32>,
    /// Seed-split self-distance of the limit ensemble, per functional.
    pub self_distance: BTreeMap<String, f64>,
    /// Noise band = 3 x self-distance; final-index distances must sit inside.
    pub noise_band: BTreeMap<String, f64>,
    pub limit_stopped_fraction: f64,
    pub limit_positive_local_time_fraction: f64,
    pub per_index: Vec<IndexReport>,
    /// Indices at which each functional's distance rose by more than the
    /// band (at most one such violation is tolerated).
    pub trend_violations: BTreeMap<String, Vec<u32>>,
    pub hypothesis: HypothesisReport,
    /// Set when a failed gate was overridden; the verdict is then unsound.
    pub unsound: bool,
    pub verdict: Verdict,
}

/// One row of raw functional samples (for CSV export).
#[derive(Clone, Debug)]
pub struct SampleRow {
    /// Ladder index; 0 is the limit ensemble.
    pub index: u32,
    pub path_id: u64,
    pub stopped: bool,
    pub terminal: Vec<f64>,
    pub sup_norm: f64,
    pub local_time: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FunctionalSamples {
    pub rows: Vec<SampleRow>,
}

impl FunctionalSamples {
    /// CSV with the same float formatting contract as path exports.
    pub fn to_csv(&self) -> String {
        use crate::sim::io::fmt_f64;
        let d = self.rows.first().map_or(0, |r| r.terminal.len());
        let mut out = String::from("index,path_id,stopped");
        for i in 1..=d {
            out.push_str(&format!(",terminal_{i}"));
        }
        out.push_str(",sup_norm,local_time,modulus\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}", r.index, r.path_id, u8::from(r.stopped)));
            for &t in &r.terminal {
                out.push(',');
                out.push_str(&fmt_f64(t));
            }
            out.push(',');
            out.push_str(&fmt_f64(r.sup_norm));
            out.push(',');
            out.push_str(&fmt_f64(r.local_time));
            out.push(',');
            out.push_str(&fmt_f64(r.modulus));
            out.push('\n');
        }
        out
    }
}

/// Report plus the raw functional samples it was computed from.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub report: ConvergenceReport,
    pub samples: FunctionalSamples,
}

impl ConvergenceReport {
    /// Human-oriented aligned-text rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "theorem {}  seed {}  paths {}  T {}  dt {}\n",
            self.theorem, self.base_seed, self.n_paths, self.horizon, self.dt
        ));
        out.push_str(&format!("verdict: {:?}{}\n", self.verdict, if self.unsound { " (UNSOUND OVERRIDE)" } else { "" }));
        if !self.hypothesis.passed {
            out.push_str(&format!("failed hypothesis diagnostics: {}\n", self.hypothesis.failed.join(", ")));
        }
        let funcs: Vec<&String> = self.self_distance.keys().collect();
        out.push_str(&format!("{:>8}", "n"));
        for f in &funcs {
            out.push_str(&format!("{:>18}", f));
        }
        out.push_str(&format!("{:>12}\n", "stopped"));
        for idx in &self.per_index {
            out.push_str(&format!("{:>8}", idx.n));
            for f in &funcs {
                let v = idx.distances.get(*f).copied().unwrap_or(f64::NAN);
                let mark = if idx.in_band.get(*f).copied().unwrap_or(false) { "*" } else { " " };
                out.push_str(&format!("{:>17.5}{}", v, mark));
            }
            out.push_str(&format!("{:>12.5}\n", idx.stopped_fraction));
        }
        out.push_str(&format!("{:>8}", "band"));
        for f in &funcs {
            out.push_str(&format!("{:>18.5}", self.noise_band[*f]));
        }
        out.push('\n');
        out.push_str("(* = within the seed-split noise band)\n");
        out
    }
}
