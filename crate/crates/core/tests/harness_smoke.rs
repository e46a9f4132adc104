//! End-to-end smoke checks of the experiment engine at desk-mini scale.

use std::collections::BTreeMap;
use std::sync::Arc;

use reflectolab_core::convergence::DomainSequence;
use reflectolab_core::geometry::{Domain, ProbeSet, Region};
use reflectolab_core::harness::{
    run_experiment, run_theorem32_experiment, run_theorem52_experiment,
    run_theorem53_experiment, DiagnosticsSpec, ExperimentSpec, Functional, HarnessError,
    LimitKind, RunParams, Theorem32Setup, Theorem52Setup, Theorem53Setup, Verdict,
};
use reflectolab_core::linalg::Mat;
use reflectolab_core::model::DiffusionSpec;

fn mini_run(dim: usize, n_paths: u64) -> RunParams {
    let mut run = RunParams::new(dim, n_paths, 20260401);
    run.indices = vec![1, 2, 4];
    run.horizon = 0.25;
    run.dt = 0.005;
    run.probe_region = Region::cube(dim, -1.5, 2.5);
    run.probe_resolution = 0.1;
    run
}

#[test]
fn constant_sequence_passes_within_noise() {
    // Identical laws at every index: all distances must sit in the band.
    let domain: Domain<f64> = Domain::orthant(2);
    let dspec = DiffusionSpec::standard(2, vec![0.5, 0.5]);
    let limit = (domain.clone(), dspec.clone());
    let member: Arc<
        dyn Fn(u32) -> Result<(Domain<f64>, DiffusionSpec<f64>), HarnessError> + Send + Sync,
    > = {
        let limit = limit.clone();
        Arc::new(move |_n| Ok(limit.clone()))
    };
    let spec = ExperimentSpec {
        theorem: "theorem21".into(),
        dim: 2,
        indices: vec![1, 2, 4],
        horizon: 0.25,
        dt: 0.005,
        n_paths: 2000,
        base_seed: 99,
        eps_v: 1e-3,
        limit_kind: LimitKind::Reflected,
        member_problem: member,
        limit_problem: limit,
        diagnostics: DiagnosticsSpec {
            domains: Some(DomainSequence::constant(Domain::orthant(2))),
            fields: Vec::new(),
            probes: ProbeSet::new(Region::cube(2, -1.0, 2.0), 0.1),
            check_condition_b: true,
            containment: None,
            extra_series: BTreeMap::new(),
        },
        functionals: Functional::ALL.to_vec(),
        modulus_delta: 0.01,
        unsound_override: false,
    };
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.report.verdict, Verdict::Pass, "report: {}", out.report.to_table());
    assert!(out.report.hypothesis.passed);
    assert!(!out.samples.rows.is_empty());
}

#[test]
fn refusal_when_condition_b_cannot_hold() {
    // Members: half-plane x2 > 0 plus a face tilting into coincidence with
    // it. The corner (5, 0) stays put while the limit (a half-space) has an
    // empty exceptional set, so condition (b) reads +inf, yet the weak gap
    // and every field gap vanish. The harness must refuse, naming the
    // diagnostic.
    let members = |n: u32| -> Result<(Domain<f64>, DiffusionSpec<f64>), HarnessError> {
        let theta = 1.0 / n as f64;
        let norm = (1.0 + theta * theta).sqrt();
        let domain = Domain::polyhedron(
            vec![vec![0.0, 1.0], vec![-theta / norm, 1.0 / norm]],
            vec![0.0, -5.0 * theta / norm],
        )?;
        Ok((domain, DiffusionSpec::standard(2, vec![0.0, 1.0])))
    };
    let diag_members = members;
    let limit_domain: Domain<f64> = Domain::half_space(vec![0.0, 1.0], 0.0).unwrap();
    let spec = ExperimentSpec {
        theorem: "theorem21".into(),
        dim: 2,
        indices: vec![1, 2, 4, 8],
        horizon: 0.1,
        dt: 0.01,
        n_paths: 50,
        base_seed: 7,
        eps_v: 1e-3,
        limit_kind: LimitKind::Reflected,
        member_problem: Arc::new(members),
        limit_problem: (limit_domain.clone(), DiffusionSpec::standard(2, vec![0.0, 1.0])),
        diagnostics: DiagnosticsSpec {
            domains: Some(DomainSequence::new(
                2,
                move |n| {
                    diag_members(n)
                        .map(|(d, _)| reflectolab_core::convergence::SeqDomain::Exact(d))
                        .map_err(|_| reflectolab_core::geometry::GeometryError::InvalidFaceList)
                },
                reflectolab_core::convergence::SeqDomain::Exact(limit_domain),
            )),
            fields: Vec::new(),
            probes: ProbeSet::new(Region::Box { lo: vec![-8.0, -1.0], hi: vec![8.0, 8.0] }, 0.25),
            check_condition_b: true,
            containment: None,
            extra_series: BTreeMap::new(),
        },
        functionals: Functional::ALL.to_vec(),
        modulus_delta: 0.01,
        unsound_override: false,
    };
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.report.verdict, Verdict::Refused);
    assert!(
        out.report.hypothesis.failed.iter().any(|f| f == "condition_b"),
        "failed: {:?}, values: {:?}",
        out.report.hypothesis.failed,
        out.report.hypothesis.values
    );
    // Weak convergence itself held on the probe set.
    assert!(!out.report.hypothesis.failed.iter().any(|f| f == "weak_gap"));
    assert!(out.samples.rows.is_empty());
}

#[test]
fn theorem32_mini_ladder_runs() {
    let mut setup = Theorem32Setup::orthant(2, vec![1.0, 1.0], mini_run(2, 400));
    setup.offset_perturbations = vec![1.0, 1.0];
    let out = run_theorem32_experiment(&setup).unwrap();
    assert!(out.report.hypothesis.passed, "hypothesis: {:?}", out.report.hypothesis);
    let v = &out.report.hypothesis.values;
    assert!(v.contains_key("face_parameter_gap"));
    assert!(v.contains_key("condition_b"));
    // At n=1 the start (1,1) is exactly the corner of {x >= 1}: every path
    // stops immediately and the index carries no usable law.
    assert!(!out.report.per_index[0].usable);
    assert_eq!(out.report.per_index[0].stopped_fraction, 1.0);
    // Distances should at least shrink from n=2 to n=4.
    let d2 = out.report.per_index[1].distances["terminal_ks"];
    let d4 = out.report.per_index[2].distances["terminal_ks"];
    assert!(d4 < d2, "d2={d2} d4={d4}");
}

#[test]
fn theorem32_hitting_gate() {
    let mut setup = Theorem32Setup::orthant(2, vec![1.0, 1.0], mini_run(2, 50));
    setup.base_covariance = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
    match run_theorem32_experiment(&setup) {
        Err(HarnessError::HittingConditionFailed { violations }) => {
            assert_eq!(violations, vec![(0, 1)]);
        }
        other => panic!("expected hitting-condition failure, got {:?}", other.map(|o| o.report.verdict)),
    }
    // Override runs it anyway, flagged unsound.
    let mut setup2 = Theorem32Setup::orthant(2, vec![1.0, 1.0], mini_run(2, 50));
    setup2.base_covariance = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
    setup2.run.unsound_override = true;
    let out = run_theorem32_experiment(&setup2).unwrap();
    assert!(out.report.unsound || out.report.hypothesis.passed);
}

#[test]
fn theorem52_mini() {
    let mut run = mini_run(2, 400);
    run.indices = vec![1, 2, 4];
    let setup = Theorem52Setup {
        center: vec![0.0, 0.0],
        drift: vec![0.0, 0.0],
        covariance: Mat::identity(2),
        start: vec![0.0, 0.0],
        containment_radius: 0.5,
        run,
    };
    let out = run_theorem52_experiment(&setup).unwrap();
    // Tight ball at n=1 reflects a lot; by n=4 almost never (T = 0.25).
    let f1 = out.report.per_index[0].positive_local_time_fraction;
    let f4 = out.report.per_index[2].positive_local_time_fraction;
    assert!(f1 > f4, "f1={f1} f4={f4}");
    assert_eq!(out.report.limit_positive_local_time_fraction, 0.0);
}

#[test]
fn theorem53_gates() {
    let run = mini_run(2, 50);
    let bad_dim = Theorem53Setup {
        puncture: vec![0.0],
        drift: vec![0.0],
        covariance: Mat::identity(1),
        start: vec![1.0],
        run: mini_run(1, 50),
    };
    assert!(matches!(
        run_theorem53_experiment(&bad_dim),
        Err(HarnessError::InvalidSpec(_))
    ));
    let on_puncture = Theorem53Setup {
        puncture: vec![0.0, 0.0],
        drift: vec![0.0, 0.0],
        covariance: Mat::identity(2),
        start: vec![0.0, 0.0],
        run: run.clone(),
    };
    assert!(matches!(
        run_theorem53_experiment(&on_puncture),
        Err(HarnessError::InvalidSpec(_))
    ));
    let ok = Theorem53Setup {
        puncture: vec![0.0, 0.0],
        drift: vec![0.0, 0.0],
        covariance: Mat::identity(2),
        start: vec![1.0, 0.0],
        run,
    };
    let out = run_theorem53_experiment(&ok).unwrap();
    assert!(out.report.hypothesis.passed, "{:?}", out.report.hypothesis);
}

#[test]
fn reports_are_reproducible_bytes() {
    let mut setup = Theorem32Setup::orthant(2, vec![1.0, 1.0], mini_run(2, 200));
    setup.offset_perturbations = vec![1.0, 1.0];
    let a = run_theorem32_experiment(&setup).unwrap();
    let b = run_theorem32_experiment(&setup).unwrap();
    let ja = serde_json::to_string_pretty(&a.report).unwrap();
    let jb = serde_json::to_string_pretty(&b.report).unwrap();
    assert_eq!(ja, jb);
    assert_eq!(a.samples.to_csv(), b.samples.to_csv());
}
