//! Monte Carlo convergence experiments: simulate ensembles along an index
//! ladder, measure functional-law distances to the limit ensemble, and issue
//! a verdict gated on the theorem's own hypothesis diagnostics.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::distance::{energy_distance, ks_per_coordinate, ks_statistic, DistanceError};
use super::functionals::{path_functionals_with, PathFunctionals};
use super::report::{
    ConvergenceReport, ExperimentOutput, FunctionalSamples, HypothesisReport, IndexReport,
    SampleRow, Verdict,
};
use crate::convergence::{
    compact_containment_index, exceptional_set_condition_b, field_convergence_gap,
    weak_convergence_gap, ConvergenceError, DomainSequence, FieldEval, FieldKind, FieldSequence,
    SeqDomain,
};
use crate::geometry::{Domain, GeometryError, ProbeSet, Puncture, Region};
use crate::linalg::{self, Mat};
use crate::model::{
    check_hitting_condition, normalize_reflection, DiffusionSpec, MatrixField, ModelError,
    ReflectionField, ReflectionMatrix, VectorField,
};
use crate::sim::rng::derive_path_seed;
use crate::sim::{simulate_ensemble_map, EnsembleError, SimOptions};
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error("limit SRBM fails the corner-avoidance condition at pairs {violations:?} (override to run anyway)")]
    HittingConditionFailed { violations: Vec<(usize, usize)> },
    #[error("corner-avoidance condition cannot be verified for a non-orthant limit (override to run anyway)")]
    HittingUnverifiable,
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    Reflected,
    NonReflected,
}

/// The functional battery entries and the statistics applied to them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Functional {
    /// Per-coordinate KS on Z(T).
    TerminalKs,
    /// Energy distance on the terminal vectors.
    TerminalEnergy,
    /// KS on sup_t |Z(t)|.
    SupNormKs,
    /// KS on l(T).
    LocalTimeKs,
    /// KS on the modulus of continuity.
    ModulusKs,
}

impl Functional {
    pub const ALL: [Functional; 5] = [
        Functional::TerminalKs,
        Functional::TerminalEnergy,
        Functional::SupNormKs,
        Functional::LocalTimeKs,
        Functional::ModulusKs,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Functional::TerminalKs => "terminal_ks",
            Functional::TerminalEnergy => "terminal_energy",
            Functional::SupNormKs => "sup_norm_ks",
            Functional::LocalTimeKs => "local_time_ks",
            Functional::ModulusKs => "modulus_ks",
        }
    }
}

type ProblemFn =
    dyn Fn(u32) -> Result<(Domain<f64>, DiffusionSpec<f64>), HarnessError> + Send + Sync;

/// Hypothesis diagnostics attached to an experiment.
pub struct DiagnosticsSpec {
    /// Domain sequence for weak-gap / condition-(b) / containment checks.
    pub domains: Option<DomainSequence<f64>>,
    /// Labeled coefficient-field sequences whose gaps must shrink.
    pub fields: Vec<(String, FieldSequence<f64>)>,
    pub probes: ProbeSet<f64>,
    pub check_condition_b: bool,
    /// Compact containment requirement: (K, max index), for whole-space
    /// limits.
    pub containment: Option<(ProbeSet<f64>, u32)>,
    /// Extra precomputed diagnostic series (name -> value per ladder index).
    pub extra_series: BTreeMap<String, Vec<f64>>,
}

pub struct ExperimentSpec {
    pub theorem: String,
    pub dim: usize,
    pub indices: Vec<u32>,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: u64,
    pub base_seed: u64,
    pub eps_v: f64,
    pub limit_kind: LimitKind,
    pub member_problem: Arc<ProblemFn>,
    pub limit_problem: (Domain<f64>, DiffusionSpec<f64>),
    pub diagnostics: DiagnosticsSpec,
    pub functionals: Vec<Functional>,
    pub modulus_delta: f64,
    pub unsound_override: bool,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.indices.is_empty() {
            return Err(HarnessError::InvalidSpec("index ladder is empty".into()));
        }
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::InvalidSpec("indices must be strictly increasing".into()));
        }
        if self.indices[0] == 0 {
            return Err(HarnessError::InvalidSpec("member indices start at 1".into()));
        }
        if self.functionals.is_empty() {
            return Err(HarnessError::InvalidSpec("functional list is empty".into()));
        }
        let limit_domain = &self.limit_problem.0;
        if limit_domain.dim() != self.dim {
            return Err(HarnessError::InvalidSpec("limit domain dimension mismatch".into()));
        }
        if self.limit_kind == LimitKind::NonReflected
            && !matches!(limit_domain, Domain::WholeSpace { .. } | Domain::PuncturedSpace { .. })
        {
            return Err(HarnessError::InvalidSpec(
                "a non-reflected limit requires the whole space or a punctured space".into(),
            ));
        }
        Ok(())
    }
}

/// Default index ladder {1, 2, 4, 8, 16}.
pub fn default_indices() -> Vec<u32> {
    vec![1, 2, 4, 8, 16]
}

fn shrinks(values: &[f64], floor: f64) -> bool {
    let first = values[0];
    let last = *values.last().unwrap();
    if first.is_infinite() || last.is_infinite() {
        return false;
    }
    (first <= floor && last <= floor) || last <= (first * 0.5).max(floor)
}

struct Samples {
    terminal: Vec<Vec<f64>>,
    sup_norm: Vec<f64>,
    local_time: Vec<f64>,
    modulus: Vec<f64>,
    stopped_fraction: f64,
    positive_local_time_fraction: f64,
}

fn split_samples(raw: &[PathFunctionals<f64>]) -> Samples {
    let total = raw.len() as f64;
    let kept: Vec<&PathFunctionals<f64>> = raw.iter().filter(|f| !f.stopped).collect();
    let stopped_fraction = 1.0 - kept.len() as f64 / total;
    let positive = raw.iter().filter(|f| f.local_time > 0.0).count() as f64 / total;
    Samples {
        terminal: kept.iter().map(|f| f.terminal.clone()).collect(),
        sup_norm: kept.iter().map(|f| f.sup_norm).collect(),
        local_time: kept.iter().map(|f| f.local_time).collect(),
        modulus: kept.iter().map(|f| f.modulus).collect(),
        stopped_fraction,
        positive_local_time_fraction: positive,
    }
}

fn functional_distance(f: Functional, a: &Samples, b: &Samples) -> Result<f64, DistanceError> {
    match f {
        Functional::TerminalKs => ks_per_coordinate(&a.terminal, &b.terminal),
        Functional::TerminalEnergy => energy_distance(&a.terminal, &b.terminal),
        Functional::SupNormKs => ks_statistic(&a.sup_norm, &b.sup_norm),
        Functional::LocalTimeKs => ks_statistic(&a.local_time, &b.local_time),
        Functional::ModulusKs => ks_statistic(&a.modulus, &b.modulus),
    }
}

fn push_rows(samples: &mut FunctionalSamples, index: u32, raw: &[PathFunctionals<f64>]) {
    for (i, f) in raw.iter().enumerate() {
        samples.rows.push(SampleRow {
            index,
            path_id: i as u64,
            stopped: f.stopped,
            terminal: f.terminal.clone(),
            sup_norm: f.sup_norm,
            local_time: f.local_time,
            modulus: f.modulus,
        });
    }
}

/// Generic engine behind the theorem experiments: diagnostics, gating,
/// simulation, distances, trend, verdict.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, HarnessError> {
    spec.validate()?;
    let diag = &spec.diagnostics;
    let floor = 2.0 * diag.probes.resolution + 1e-9;
    let mut values: BTreeMap<String, Vec<f64>> = diag.extra_series.clone();
    let mut failed: Vec<String> = Vec::new();

    let skip_weak_gate = matches!(
        diag.domains.as_ref().map(|d| d.limit()),
        Some(SeqDomain::Exact(Domain::WholeSpace { .. }))
    );
    if let Some(domains) = &diag.domains {
        let mut weak = Vec::new();
        for &n in &spec.indices {
            weak.push(weak_convergence_gap(domains, n, &diag.probes)?);
        }
        values.insert("weak_gap".into(), weak);
        if diag.check_condition_b {
            let mut cb = Vec::new();
            for &n in &spec.indices {
                cb.push(exceptional_set_condition_b(domains, n, &diag.probes)?);
            }
            values.insert("condition_b".into(), cb);
        }
        for (name, fields) in &diag.fields {
            let mut gaps = Vec::new();
            for &n in &spec.indices {
                gaps.push(field_convergence_gap(fields, domains, n, &diag.probes)?);
            }
            values.insert(format!("field_gap_{name}"), gaps);
        }
        if let Some((k, max_n)) = &diag.containment {
            match compact_containment_index(domains, k, *max_n) {
                Ok(n0) => {
                    values.insert("containment_index".into(), vec![n0 as f64]);
                }
                Err(ConvergenceError::ContainmentNotFound { .. }) => {
                    failed.push("compact_containment".into());
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let mut start_gap = Vec::new();
    for &n in &spec.indices {
        let (_, dspec) = (spec.member_problem)(n)?;
        start_gap.push(linalg::distance(&dspec.start, &spec.limit_problem.1.start));
    }
    values.insert("start_distance".into(), start_gap);

    for (name, series) in &values {
        let f = if name == "start_distance" { 1e-9 } else { floor };
        if name == "weak_gap" && skip_weak_gate {
            continue;
        }
        if name == "containment_index" {
            continue;
        }
        if !shrinks(series, f) {
            failed.push(name.clone());
        }
    }
    failed.sort();
    failed.dedup();
    let hypotheses_ok = failed.is_empty();
    let unsound = !hypotheses_ok && spec.unsound_override;
    if !hypotheses_ok && !spec.unsound_override {
        // Refuse rather than silently pass.
        return Ok(ExperimentOutput {
            report: ConvergenceReport {
                theorem: spec.theorem.clone(),
                base_seed: spec.base_seed,
                n_paths: spec.n_paths,
                horizon: spec.horizon,
                dt: spec.dt,
                indices: spec.indices.clone(),
                self_distance: BTreeMap::new(),
                noise_band: BTreeMap::new(),
                limit_stopped_fraction: 0.0,
                limit_positive_local_time_fraction: 0.0,
                per_index: Vec::new(),
                trend_violations: BTreeMap::new(),
                hypothesis: HypothesisReport { passed: false, failed, values },
                unsound: false,
                verdict: Verdict::Refused,
            },
            samples: FunctionalSamples::default(),
        });
    }

    // Ensembles: the limit twice (seed-split noise calibration), then the
    // ladder members on seeds derived per index.
    let opts = SimOptions { horizon: spec.horizon, dt: spec.dt, eps_v: spec.eps_v };
    let delta = spec.modulus_delta;
    let run = |domain: &Domain<f64>, dspec: &DiffusionSpec<f64>, seed: u64| {
        simulate_ensemble_map(domain, dspec, opts, spec.n_paths, seed, |p| {
            path_functionals_with(p, delta)
        })
    };
    let (limit_domain, limit_spec) = &spec.limit_problem;
    let raw_limit = run(limit_domain, limit_spec, spec.base_seed)?;
    let replica_seed = derive_path_seed(spec.base_seed, u64::MAX - 7);
    let raw_replica = run(limit_domain, limit_spec, replica_seed)?;
    let limit = split_samples(&raw_limit);
    let replica = split_samples(&raw_replica);
    if limit.terminal.is_empty() || replica.terminal.is_empty() {
        return Err(HarnessError::InvalidSpec(
            "limit ensemble is entirely stopped at the exceptional set".into(),
        ));
    }

    let mut samples = FunctionalSamples::default();
    push_rows(&mut samples, 0, &raw_limit);

    let mut self_distance = BTreeMap::new();
    let mut noise_band = BTreeMap::new();
    for &f in &spec.functionals {
        let d = functional_distance(f, &limit, &replica)?;
        self_distance.insert(f.label().to_string(), d);
        noise_band.insert(f.label().to_string(), 3.0 * d.max(1e-12));
    }

    let mut per_index = Vec::new();
    for &n in &spec.indices {
        let (dom, dspec) = (spec.member_problem)(n)?;
        let raw = run(&dom, &dspec, derive_path_seed(spec.base_seed, 1_000_000 + n as u64))?;
        push_rows(&mut samples, n, &raw);
        let member = split_samples(&raw);
        let mut distances = BTreeMap::new();
        let mut in_band = BTreeMap::new();
        let usable = !member.terminal.is_empty();
        if usable {
            for &f in &spec.functionals {
                let d = functional_distance(f, &member, &limit)?;
                let band = noise_band[f.label()];
                distances.insert(f.label().to_string(), d);
                in_band.insert(f.label().to_string(), d <= band);
            }
        }
        per_index.push(IndexReport {
            n,
            usable,
            distances,
            in_band,
            stopped_fraction: member.stopped_fraction,
            positive_local_time_fraction: member.positive_local_time_fraction,
        });
    }

    // Trend: non-increasing up to at most one noise-band violation, and the
    // final index must sit inside the band. Fully stopped indices carry no
    // usable law and are skipped (their stopped fraction is the red flag).
    let usable: Vec<&IndexReport> = per_index.iter().filter(|r| r.usable).collect();
    let mut trend_violations: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut verdict_ok = !usable.is_empty() && per_index.last().unwrap().usable;
    for &f in &spec.functionals {
        let label = f.label();
        let band = noise_band[label];
        let mut violations = Vec::new();
        for w in usable.windows(2) {
            let prev = w[0].distances[label];
            let next = w[1].distances[label];
            if next > prev + band {
                violations.push(w[1].n);
            }
        }
        if violations.len() > 1 {
            verdict_ok = false;
        }
        if let Some(last) = usable.last() {
            if !last.in_band.get(label).copied().unwrap_or(false) {
                verdict_ok = false;
            }
        }
        trend_violations.insert(label.to_string(), violations);
    }

    let verdict = if verdict_ok && hypotheses_ok { Verdict::Pass } else { Verdict::Fail };
    Ok(ExperimentOutput {
        report: ConvergenceReport {
            theorem: spec.theorem.clone(),
            base_seed: spec.base_seed,
            n_paths: spec.n_paths,
            horizon: spec.horizon,
            dt: spec.dt,
            indices: spec.indices.clone(),
            self_distance,
            noise_band,
            limit_stopped_fraction: limit.stopped_fraction,
            limit_positive_local_time_fraction: limit.positive_local_time_fraction,
            per_index,
            trend_violations,
            hypothesis: HypothesisReport { passed: hypotheses_ok, failed, values },
            unsound,
            verdict,
        },
        samples,
    })
}

/// General-hypotheses experiment (domain, field and start-point convergence
/// with the exceptional-set condition when applicable).
pub fn run_theorem21_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, HarnessError> {
    run_experiment(spec)
}

/// How ladder perturbations decay in the index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayKind {
    /// 1/n
    InverseIndex,
    /// 2^-n
    Geometric,
}

impl DecayKind {
    pub fn eval(self, n: u32) -> f64 {
        match self {
            DecayKind::InverseIndex => 1.0 / n as f64,
            DecayKind::Geometric => 2f64.powi(-(n as i32)),
        }
    }
}

/// Shared run parameters for the theorem-specific builders.
#[derive(Clone, Debug)]
pub struct RunParams {
    pub indices: Vec<u32>,
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: u64,
    pub base_seed: u64,
    pub eps_v: f64,
    pub probe_region: Region<f64>,
    pub probe_resolution: f64,
    pub unsound_override: bool,
}

impl RunParams {
    pub fn new(dim: usize, n_paths: u64, base_seed: u64) -> Self {
        Self {
            indices: default_indices(),
            horizon: tol::T_DEFAULT,
            dt: tol::DT_DEFAULT,
            n_paths,
            base_seed,
            eps_v: tol::EPS_V_DEFAULT,
            probe_region: Region::cube(dim, -2.0, 3.0),
            probe_resolution: 0.05,
            unsound_override: false,
        }
    }

    fn probes(&self) -> ProbeSet<f64> {
        ProbeSet::new(self.probe_region.clone(), self.probe_resolution)
    }
}

/// Polyhedral SRBM ladder: face normals, offsets, reflection matrix, drift,
/// covariance and start point all converge at the decay rate.
#[derive(Clone)]
pub struct Theorem32Setup {
    pub base_normals: Vec<Vec<f64>>,
    pub normal_perturbations: Vec<Vec<f64>>,
    pub base_offsets: Vec<f64>,
    pub offset_perturbations: Vec<f64>,
    pub base_reflection: Mat<f64>,
    pub reflection_perturbation: Mat<f64>,
    pub base_drift: Vec<f64>,
    pub drift_perturbation: Vec<f64>,
    pub base_covariance: Mat<f64>,
    pub covariance_perturbation: Mat<f64>,
    pub base_start: Vec<f64>,
    pub start_perturbation: Vec<f64>,
    pub decay: DecayKind,
    pub run: RunParams,
}

impl Theorem32Setup {
    /// The identity-reflection orthant SRBM, ready for perturbing.
    pub fn orthant(dim: usize, start: Vec<f64>, run: RunParams) -> Self {
        let mut normals = Vec::new();
        for i in 0..dim {
            let mut n = vec![0.0; dim];
            n[i] = 1.0;
            normals.push(n);
        }
        Self {
            base_normals: normals,
            normal_perturbations: vec![vec![0.0; dim]; dim],
            base_offsets: vec![0.0; dim],
            offset_perturbations: vec![0.0; dim],
            base_reflection: Mat::identity(dim),
            reflection_perturbation: Mat::zeros(dim, dim),
            base_drift: vec![0.0; dim],
            drift_perturbation: vec![0.0; dim],
            base_covariance: Mat::identity(dim),
            covariance_perturbation: Mat::zeros(dim, dim),
            base_start: start,
            start_perturbation: vec![0.0; dim],
            decay: DecayKind::InverseIndex,
            run,
        }
    }

    fn faces_at(&self, decay: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let normals = self
            .base_normals
            .iter()
            .zip(&self.normal_perturbations)
            .map(|(base, pert)| {
                let mut n: Vec<f64> =
                    base.iter().zip(pert).map(|(&b, &p)| b + p * decay).collect();
                let norm = linalg::norm(&n);
                for v in &mut n {
                    *v /= norm;
                }
                n
            })
            .collect();
        let offsets = self
            .base_offsets
            .iter()
            .zip(&self.offset_perturbations)
            .map(|(&b, &p)| b + p * decay)
            .collect();
        (normals, offsets)
    }

    fn problem_at(&self, decay: f64) -> Result<(Domain<f64>, DiffusionSpec<f64>), HarnessError> {
        let (normals, offsets) = self.faces_at(decay);
        let domain = Domain::polyhedron(normals, offsets)?;
        let r = self.base_reflection.add(&self.reflection_perturbation.scaled(decay));
        let drift: Vec<f64> = self
            .base_drift
            .iter()
            .zip(&self.drift_perturbation)
            .map(|(&b, &p)| b + p * decay)
            .collect();
        let cov = self.base_covariance.add(&self.covariance_perturbation.scaled(decay));
        let start: Vec<f64> = self
            .base_start
            .iter()
            .zip(&self.start_perturbation)
            .map(|(&b, &p)| b + p * decay)
            .collect();
        let spec = DiffusionSpec {
            drift: VectorField::Constant(drift),
            covariance: MatrixField::Constant(cov),
            reflection: ReflectionField::PerFace(ReflectionMatrix(r)),
            start,
        };
        Ok((domain, spec))
    }

    fn is_orthant_form(&self) -> bool {
        let d = self.base_normals.first().map_or(0, |n| n.len());
        self.base_normals.len() == d
            && self.base_normals.iter().enumerate().all(|(i, n)| {
                n.iter()
                    .enumerate()
                    .all(|(j, &v)| (v - if i == j { 1.0 } else { 0.0 }).abs() <= 1e-12)
            })
    }

    pub fn build(&self) -> Result<ExperimentSpec, HarnessError> {
        let dim = self.base_start.len();
        // Corner-avoidance gate on the limit SRBM (orthant-scoped checker).
        if self.is_orthant_form() {
            let rep = check_hitting_condition(
                &ReflectionMatrix(self.base_reflection.clone()),
                &self.base_covariance,
            )?;
            if !rep.avoids_corners && !self.run.unsound_override {
                return Err(HarnessError::HittingConditionFailed { violations: rep.violations });
            }
        } else if !self.run.unsound_override {
            return Err(HarnessError::HittingUnverifiable);
        }
        let limit = self.problem_at(0.0)?;
        let setup = self.clone();
        let decay = self.decay;
        let member_problem: Arc<ProblemFn> =
            Arc::new(move |n| setup.problem_at(decay.eval(n)));

        // Diagnostics: the domain family plus all three field families.
        let faces_setup = self.clone();
        let domains = DomainSequence::polyhedron_family(
            move |n| faces_setup.faces_at(decay.eval(n)),
            limit.0.clone(),
        );
        let drift_setup = self.clone();
        let drift_fields = FieldSequence::new(
            FieldKind::Drift,
            move |n| {
                let dval = decay.eval(n);
                let g: Vec<f64> = drift_setup
                    .base_drift
                    .iter()
                    .zip(&drift_setup.drift_perturbation)
                    .map(|(&b, &p)| b + p * dval)
                    .collect();
                FieldEval::Vector(Arc::new(move |_x: &[f64]| g.clone()))
            },
            {
                let g0 = self.base_drift.clone();
                FieldEval::Vector(Arc::new(move |_x: &[f64]| g0.clone()))
            },
        );
        let cov_setup = self.clone();
        let cov_fields = FieldSequence::new(
            FieldKind::Covariance,
            move |n| {
                let a = cov_setup
                    .base_covariance
                    .add(&cov_setup.covariance_perturbation.scaled(decay.eval(n)));
                FieldEval::Matrix(Arc::new(move |_x: &[f64]| a.clone()))
            },
            {
                let a0 = self.base_covariance.clone();
                FieldEval::Matrix(Arc::new(move |_x: &[f64]| a0.clone()))
            },
        );
        let refl_setup = self.clone();
        let reflection_fields = FieldSequence::new(
            FieldKind::Reflection,
            move |n| {
                let r = refl_setup
                    .base_reflection
                    .add(&refl_setup.reflection_perturbation.scaled(decay.eval(n)));
                FieldEval::Reflection(Arc::new(move |bp| {
                    let face = bp.face.ok_or(ModelError::Unsupported)?;
                    normalize_reflection(&r.col(face), &bp.inward_normal)
                }))
            },
            {
                let r0 = self.base_reflection.clone();
                FieldEval::Reflection(Arc::new(move |bp| {
                    let face = bp.face.ok_or(ModelError::Unsupported)?;
                    normalize_reflection(&r0.col(face), &bp.inward_normal)
                }))
            },
        );

        // Extra ladder diagnostics in face-parameter and column form.
        let mut face_param = Vec::new();
        let mut column_gap = Vec::new();
        for &n in &self.run.indices {
            let dval = decay.eval(n);
            let (normals, offsets) = self.faces_at(dval);
            let (n0, b0) = self.faces_at(0.0);
            let mut fp = 0.0f64;
            for i in 0..normals.len() {
                fp = fp.max(
                    linalg::distance(&normals[i], &n0[i]) + (offsets[i] - b0[i]).abs(),
                );
            }
            face_param.push(fp);
            let rn = self.base_reflection.add(&self.reflection_perturbation.scaled(dval));
            let mut cg = 0.0f64;
            for i in 0..rn.cols() {
                cg = cg.max(linalg::distance(&rn.col(i), &self.base_reflection.col(i)));
            }
            column_gap.push(cg);
        }
        let mut extra = BTreeMap::new();
        extra.insert("face_parameter_gap".into(), face_param);
        extra.insert("reflection_column_gap".into(), column_gap);

        Ok(ExperimentSpec {
            theorem: "theorem32".into(),
            dim,
            indices: self.run.indices.clone(),
            horizon: self.run.horizon,
            dt: self.run.dt,
            n_paths: self.run.n_paths,
            base_seed: self.run.base_seed,
            eps_v: self.run.eps_v,
            limit_kind: LimitKind::Reflected,
            member_problem,
            limit_problem: limit,
            diagnostics: DiagnosticsSpec {
                domains: Some(domains),
                fields: vec![
                    ("drift".into(), drift_fields),
                    ("covariance".into(), cov_fields),
                    ("reflection".into(), reflection_fields),
                ],
                probes: self.run.probes(),
                check_condition_b: true,
                containment: None,
                extra_series: extra,
            },
            functionals: Functional::ALL.to_vec(),
            modulus_delta: tol::MODULUS_DELTA,
            unsound_override: self.run.unsound_override,
        })
    }
}

/// Convergent polyhedral SRBM ladder (face parameters, reflection matrix,
/// drift, covariance and start points all converging).
pub fn run_theorem32_experiment(setup: &Theorem32Setup) -> Result<ExperimentOutput, HarnessError> {
    run_experiment(&setup.build()?)
}

/// Expanding domains D_n = Ball(center, n) with a non-reflected limit.
#[derive(Clone)]
pub struct Theorem52Setup {
    pub center: Vec<f64>,
    pub drift: Vec<f64>,
    pub covariance: Mat<f64>,
    pub start: Vec<f64>,
    /// Radius of the compact-containment neighborhood around the start.
    pub containment_radius: f64,
    pub run: RunParams,
}

impl Theorem52Setup {
    pub fn build(&self) -> Result<ExperimentSpec, HarnessError> {
        let dim = self.start.len();
        let center = self.center.clone();
        let drift = self.drift.clone();
        let cov = self.covariance.clone();
        let start = self.start.clone();
        let member_problem: Arc<ProblemFn> = Arc::new(move |n| {
            let domain = Domain::ball(center.clone(), n as f64)?;
            let spec = DiffusionSpec {
                drift: VectorField::Constant(drift.clone()),
                covariance: MatrixField::Constant(cov.clone()),
                reflection: ReflectionField::Normal,
                start: start.clone(),
            };
            Ok((domain, spec))
        });
        let limit_problem = (
            Domain::whole_space(dim),
            DiffusionSpec {
                drift: VectorField::Constant(self.drift.clone()),
                covariance: MatrixField::Constant(self.covariance.clone()),
                reflection: ReflectionField::Normal,
                start: self.start.clone(),
            },
        );
        let domains = DomainSequence::expanding_balls(self.center.clone());
        let containment_probes = ProbeSet::new(
            Region::Ball { center: self.start.clone(), radius: self.containment_radius },
            (self.containment_radius / 4.0).max(1e-6),
        );
        let max_index = *self.run.indices.last().unwrap();
        Ok(ExperimentSpec {
            theorem: "theorem52".into(),
            dim,
            indices: self.run.indices.clone(),
            horizon: self.run.horizon,
            dt: self.run.dt,
            n_paths: self.run.n_paths,
            base_seed: self.run.base_seed,
            eps_v: self.run.eps_v,
            limit_kind: LimitKind::NonReflected,
            member_problem,
            limit_problem,
            diagnostics: DiagnosticsSpec {
                domains: Some(domains),
                fields: Vec::new(),
                probes: self.run.probes(),
                check_condition_b: false,
                containment: Some((containment_probes, max_index)),
                extra_series: BTreeMap::new(),
            },
            functionals: Functional::ALL.to_vec(),
            modulus_delta: tol::MODULUS_DELTA,
            unsound_override: self.run.unsound_override,
        })
    }
}

pub fn run_theorem52_experiment(setup: &Theorem52Setup) -> Result<ExperimentOutput, HarnessError> {
    run_experiment(&setup.build()?)
}

/// Shrinking puncture D_n = R^d minus the closed ball of radius 1/n around
/// `puncture`, with a plain-diffusion limit (the point is polar for d >= 2).
#[derive(Clone)]
pub struct Theorem53Setup {
    pub puncture: Vec<f64>,
    pub drift: Vec<f64>,
    pub covariance: Mat<f64>,
    pub start: Vec<f64>,
    pub run: RunParams,
}

impl Theorem53Setup {
    pub fn build(&self) -> Result<ExperimentSpec, HarnessError> {
        let dim = self.start.len();
        if dim < 2 {
            return Err(HarnessError::InvalidSpec(
                "a point puncture needs dimension >= 2 (codimension at least 2)".into(),
            ));
        }
        if linalg::distance(&self.start, &self.puncture) <= 0.0 {
            return Err(HarnessError::InvalidSpec("start point lies on the excluded set".into()));
        }
        let puncture = self.puncture.clone();
        let drift = self.drift.clone();
        let cov = self.covariance.clone();
        let start = self.start.clone();
        let member_problem: Arc<ProblemFn> = Arc::new(move |n| {
            let domain = Domain::punctured(
                puncture.len(),
                vec![Puncture::ClosedBall { center: puncture.clone(), radius: 1.0 / n as f64 }],
            )?;
            let spec = DiffusionSpec {
                drift: VectorField::Constant(drift.clone()),
                covariance: MatrixField::Constant(cov.clone()),
                reflection: ReflectionField::Normal,
                start: start.clone(),
            };
            Ok((domain, spec))
        });
        let limit_problem = (
            Domain::whole_space(dim),
            DiffusionSpec {
                drift: VectorField::Constant(self.drift.clone()),
                covariance: MatrixField::Constant(self.covariance.clone()),
                reflection: ReflectionField::Normal,
                start: self.start.clone(),
            },
        );
        // Diagnostic limit: R^d minus the puncture point, whose phi the
        // members' signed distances converge to.
        let p2 = self.puncture.clone();
        let diag_limit = Domain::punctured(
            dim,
            vec![Puncture::Affine { base: self.puncture.clone(), basis: vec![] }],
        )?;
        let domains = DomainSequence::new(
            dim,
            move |n| {
                Ok(SeqDomain::Exact(Domain::punctured(
                    p2.len(),
                    vec![Puncture::ClosedBall { center: p2.clone(), radius: 1.0 / n as f64 }],
                )?))
            },
            SeqDomain::Exact(diag_limit),
        );
        Ok(ExperimentSpec {
            theorem: "theorem53".into(),
            dim,
            indices: self.run.indices.clone(),
            horizon: self.run.horizon,
            dt: self.run.dt,
            n_paths: self.run.n_paths,
            base_seed: self.run.base_seed,
            eps_v: self.run.eps_v,
            limit_kind: LimitKind::NonReflected,
            member_problem,
            limit_problem,
            diagnostics: DiagnosticsSpec {
                domains: Some(domains),
                fields: Vec::new(),
                probes: self.run.probes(),
                check_condition_b: false,
                containment: None,
                extra_series: BTreeMap::new(),
            },
            functionals: Functional::ALL.to_vec(),
            modulus_delta: tol::MODULUS_DELTA,
            unsound_override: self.run.unsound_override,
        })
    }
}

pub fn run_theorem53_experiment(setup: &Theorem53Setup) -> Result<ExperimentOutput, HarnessError> {
    run_experiment(&setup.build()?)
}
