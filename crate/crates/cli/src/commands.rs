//! Subcommand implementations. Each writes its artifacts into the output
//! directory and returns the process exit code (0 complete/pass, 2 verdict
//! fail).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use toml::Value;

use reflectolab_core::convergence::{
    exceptional_set_condition_b, hausdorff_distance, weak_convergence_gap, wijsman_gap,
    ConvergenceError, DomainSequence, SeqDomain, WijsmanTarget,
};
use reflectolab_core::geometry::sample::{check_assumption1, Assumption1Options};
use reflectolab_core::geometry::{Domain, ProbeSet};
use reflectolab_core::harness::{
    path_functionals, run_experiment, run_theorem32_experiment, run_theorem52_experiment,
    run_theorem53_experiment, DiagnosticsSpec, ExperimentOutput, ExperimentSpec, Functional,
    HarnessError, LimitKind, RunParams, Verdict,
};
use reflectolab_core::model::{check_hitting_condition, DiffusionSpec, ModelError, ReflectionMatrix};
use reflectolab_core::sim::rng::PathRng;
use reflectolab_core::sim::{io as sim_io, simulate_ensemble, SimOptions};
use reflectolab_core::tol;

use crate::config::{self, ConfigError, ExperimentConfig};
use crate::error::CliError;

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
    fs::write(dir.join(name), text + "\n").map_err(CliError::io)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), text).map_err(CliError::io)
}

fn getv<'a>(root: &'a Value, key: &str) -> Result<&'a Value, ConfigError> {
    root.get(key).ok_or_else(|| ConfigError::at(key, "missing required table"))
}

fn config_seed(table: &Value) -> Option<u64> {
    table.get("seed").and_then(|v| v.as_integer()).and_then(|i| u64::try_from(i).ok())
}

pub struct CommandCtx<'a> {
    pub root: &'a Value,
    pub out_dir: &'a Path,
    pub cli_seed: Option<u64>,
    pub env_seed: Option<u64>,
    pub dump_paths: bool,
    pub unsound_override: bool,
    pub outputs: Vec<String>,
    pub seed_used: Option<u64>,
}

impl<'a> CommandCtx<'a> {
    fn resolve_seed(&mut self, table: &Value, required: bool) -> Result<u64, CliError> {
        let seed = self.cli_seed.or_else(|| config_seed(table)).or(self.env_seed);
        match seed {
            Some(s) => {
                self.seed_used = Some(s);
                Ok(s)
            }
            None if required => Err(CliError::config(ConfigError::at(
                "seed",
                "stochastic commands need a seed (--seed, config `seed`, or REFLECTOLAB_SEED)",
            ))),
            None => {
                self.seed_used = Some(0);
                Ok(0)
            }
        }
    }

    fn record(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }
}

/// `simulate`: one ensemble, functional samples to CSV, trajectories on
/// request.
pub fn simulate(ctx: &mut CommandCtx) -> Result<u8, CliError> {
    let sim_table = getv(ctx.root, "simulate").map_err(CliError::config)?;
    let domain = config::domain(getv(ctx.root, "domain").map_err(CliError::config)?, "domain")
        .map_err(CliError::config)?;
    let spec = config::diffusion(
        getv(ctx.root, "diffusion").map_err(CliError::config)?,
        "diffusion",
        &domain,
    )
    .map_err(CliError::config)?;
    let horizon = number(sim_table, "horizon", tol::T_DEFAULT)?;
    let dt = number(sim_table, "dt", tol::DT_DEFAULT)?;
    let eps_v = number(sim_table, "eps_v", tol::EPS_V_DEFAULT)?;
    let n_paths = sim_table
        .get("paths")
        .and_then(|v| v.as_integer())
        .filter(|&v| v > 0)
        .ok_or_else(|| CliError::config(ConfigError::at("simulate.paths", "need a positive path count")))?
        as u64;
    let seed = ctx.resolve_seed(sim_table, true)?;
    let opts = SimOptions { horizon, dt, eps_v };
    let paths = simulate_ensemble(&domain, &spec, opts, n_paths, seed).map_err(CliError::sim)?;

    let mut samples = reflectolab_core::harness::FunctionalSamples::default();
    for p in &paths {
        let f = path_functionals(p);
        samples.rows.push(reflectolab_core::harness::SampleRow {
            index: 0,
            path_id: p.path_id,
            stopped: f.stopped,
            terminal: f.terminal,
            sup_norm: f.sup_norm,
            local_time: f.local_time,
            modulus: f.modulus,
        });
    }
    write_text(ctx.out_dir, "samples.csv", &samples.to_csv())?;
    ctx.record("samples.csv");
    let stopped = paths.iter().filter(|p| p.is_stopped()).count();
    write_json(
        ctx.out_dir,
        "report.json",
        &json!({
            "paths": n_paths,
            "steps": paths.first().map(|p| p.n_steps()).unwrap_or(0),
            "stopped_fraction": stopped as f64 / n_paths as f64,
            "mean_local_time": paths.iter().map(|p| p.total_local_time()).sum::<f64>() / n_paths as f64,
        }),
    )?;
    ctx.record("report.json");
    if ctx.dump_paths {
        let mut csv = Vec::new();
        sim_io::write_paths_csv(&mut csv, &paths).map_err(CliError::io)?;
        fs::write(ctx.out_dir.join("paths.csv"), csv).map_err(CliError::io)?;
        ctx.record("paths.csv");
        let mut bin = Vec::new();
        sim_io::write_frames(&mut bin, &paths).map_err(CliError::io)?;
        fs::write(ctx.out_dir.join("paths.bin"), bin).map_err(CliError::io)?;
        ctx.record("paths.bin");
    }
    Ok(0)
}

fn number(table: &Value, key: &str, default: f64) -> Result<f64, CliError> {
    match table.get(key) {
        None => Ok(default),
        Some(Value::Float(f)) => Ok(*f),
        Some(Value::Integer(i)) => Ok(*i as f64),
        Some(_) => Err(CliError::config(ConfigError::at(key, "expected a number"))),
    }
}

/// `geometry-check`: Assumption-1 discrepancy plus Lipschitz and projection
/// consistency spot checks on the probe set.
pub fn geometry_check(ctx: &mut CommandCtx) -> Result<u8, CliError> {
    let domain = config::domain(getv(ctx.root, "domain").map_err(CliError::config)?, "domain")
        .map_err(CliError::config)?;
    let probe_set = config::probes(getv(ctx.root, "probes").map_err(CliError::config)?, "probes")
        .map_err(CliError::config)?;
    let table = ctx.root.get("geometry_check").cloned().unwrap_or(Value::Table(Default::default()));
    let fail_threshold = number(&table, "max_discrepancy", 1e-6)?;
    let lipschitz_pairs = table
        .get("lipschitz_pairs")
        .and_then(|v| v.as_integer())
        .unwrap_or(2000)
        .max(0) as usize;
    let seed = ctx.resolve_seed(&table, false)?;

    let opts = Assumption1Options {
        resolution: number(&table, "resolution", 1e-8)?,
        collar: number(&table, "collar", 1e-7)?,
        ..Assumption1Options::default()
    };
    let probes = probe_set.points();
    let rep = check_assumption1(&domain, &probes, &opts).map_err(CliError::geometry)?;

    // 1-Lipschitz spot check on random pairs inside the probe region.
    let (lo, hi) = probe_set.region.enclosing_box();
    let mut rng = PathRng::new(seed);
    let dim = domain.dim();
    let mut draw_point = |rng: &mut PathRng| -> Vec<f64> {
        (0..dim)
            .map(|k| {
                let (u, _) = rng.normal_pair();
                let t = 0.5 * (1.0 + libm_erf(u / 2f64.sqrt()));
                lo[k] + (hi[k] - lo[k]) * t
            })
            .collect()
    };
    let mut lipschitz_excess: f64 = 0.0;
    for _ in 0..lipschitz_pairs {
        let x = draw_point(&mut rng);
        let y = draw_point(&mut rng);
        let px = domain.signed_distance(&x).map_err(CliError::geometry)?;
        let py = domain.signed_distance(&y).map_err(CliError::geometry)?;
        if px.is_finite() && py.is_finite() {
            let dist: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            lipschitz_excess = lipschitz_excess.max((px - py).abs() - dist);
        }
    }

    // Projection consistency |x - zeta(x)| = |phi(x)| where zeta is defined.
    let mut projection_error: f64 = 0.0;
    let mut projection_checked = 0usize;
    for x in &probes {
        match domain.nearest_boundary_point(x) {
            Ok(bp) => {
                let phi = domain.signed_distance(x).map_err(CliError::geometry)?;
                let d: f64 =
                    x.iter().zip(&bp.point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                projection_error = projection_error.max((d - phi.abs()).abs());
                projection_checked += 1;
            }
            Err(_) => continue,
        }
    }

    let pass = rep.max_discrepancy <= fail_threshold
        && lipschitz_excess <= 1e-12
        && projection_error <= tol::PROJECTION;
    write_json(
        ctx.out_dir,
        "report.json",
        &json!({
            "assumption1_max_discrepancy": rep.max_discrepancy,
            "assumption1_worst_probe": rep.worst_probe,
            "assumption1_threshold": fail_threshold,
            "lipschitz_excess": lipschitz_excess,
            "lipschitz_pairs": lipschitz_pairs,
            "projection_error": projection_error,
            "projection_checked": projection_checked,
            "probes": probes.len(),
            "pass": pass,
        }),
    )?;
    ctx.record("report.json");
    Ok(if pass { 0 } else { 2 })
}

// Abramowitz-Stegun 7.1.26 rational approximation (|err| < 1.5e-7), enough
// for spreading uniform probes.
fn libm_erf(x: f64) -> f64 {
    let s = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    s * y
}

/// `domain-convergence`: gap tables along the index ladder.
pub fn domain_convergence(ctx: &mut CommandCtx) -> Result<u8, CliError> {
    let seq = config::domain_sequence(getv(ctx.root, "sequence").map_err(CliError::config)?, "sequence")
        .map_err(CliError::config)?;
    let probe_set = config::probes(getv(ctx.root, "probes").map_err(CliError::config)?, "probes")
        .map_err(CliError::config)?;
    let table = ctx
        .root
        .get("domain_convergence")
        .cloned()
        .unwrap_or(Value::Table(Default::default()));
    let indices: Vec<u32> = match table.get("indices") {
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| v.as_integer().map(|i| i as u32))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CliError::config(ConfigError::at("domain_convergence.indices", "expected integers")))?,
        _ => reflectolab_core::harness::default_indices(),
    };
    let hausdorff_h = number(&table, "hausdorff_resolution", probe_set.resolution)?;
    let with_hausdorff = table.get("hausdorff").and_then(|v| v.as_bool()).unwrap_or(false);

    let mut rows = Vec::new();
    for &n in &indices {
        let weak = weak_convergence_gap(&seq, n, &probe_set).map_err(CliError::convergence)?;
        let mut row = BTreeMap::new();
        row.insert("n".to_string(), json!(n));
        row.insert("weak_gap".to_string(), json!(weak));
        for (name, target) in [
            ("wijsman_boundary", WijsmanTarget::Boundary),
            ("wijsman_domain", WijsmanTarget::Domain),
            ("wijsman_complement", WijsmanTarget::Complement),
        ] {
            let g = wijsman_gap(&seq, n, target, &probe_set).map_err(CliError::convergence)?;
            row.insert(name.to_string(), json!(g));
        }
        match exceptional_set_condition_b(&seq, n, &probe_set) {
            Ok(v) => {
                row.insert("condition_b".to_string(), json!(v));
            }
            Err(ConvergenceError::NotPolyhedral) => {}
            Err(e) => return Err(CliError::convergence(e)),
        }
        if with_hausdorff {
            let member = seq.member(n).map_err(CliError::geometry)?;
            if let (Some(md), Some(ld)) = (member.as_exact(), seq.limit().as_exact()) {
                let d = hausdorff_distance(md, ld, hausdorff_h, Some(&probe_set.region))
                    .map_err(CliError::convergence)?;
                row.insert("hausdorff".to_string(), json!(d));
            }
        }
        rows.push(row);
    }
    write_json(ctx.out_dir, "report.json", &json!({ "indices": indices, "rows": rows }))?;
    ctx.record("report.json");
    Ok(0)
}

/// `hitting-check`: the corner-avoidance criterion for an orthant SRBM.
pub fn hitting_check(ctx: &mut CommandCtx) -> Result<u8, CliError> {
    let table = getv(ctx.root, "hitting_check").map_err(CliError::config)?;
    let r = crate::config_matrix(table, "reflection")?;
    let a = crate::config_matrix(table, "covariance")?;
    match check_hitting_condition(&ReflectionMatrix(r), &a) {
        Ok(rep) => {
            write_json(
                ctx.out_dir,
                "report.json",
                &json!({
                    "avoids_corners": rep.avoids_corners,
                    "violations": rep.violations,
                    "spectral_radius_i_minus_r": rep.spectral_radius_i_minus_r,
                }),
            )?;
            ctx.record("report.json");
            Ok(if rep.avoids_corners { 0 } else { 2 })
        }
        Err(e @ (ModelError::HypothesesNotMet { .. } | ModelError::Unsupported)) => {
            write_json(
                ctx.out_dir,
                "report.json",
                &json!({ "avoids_corners": false, "hypotheses_not_met": e.to_string() }),
            )?;
            ctx.record("report.json");
            Ok(2)
        }
        Err(e) => Err(CliError::model(e)),
    }
}

/// `experiment`: theorem-level convergence run.
pub fn experiment(ctx: &mut CommandCtx) -> Result<u8, CliError> {
    let exp_table = getv(ctx.root, "experiment").map_err(CliError::config)?;
    let seed = ctx.resolve_seed(exp_table, true)?;
    let cfg =
        config::experiment(ctx.root, seed, ctx.unsound_override).map_err(CliError::config)?;
    let output: ExperimentOutput = match cfg {
        ExperimentConfig::Theorem32(setup) => run_theorem32_experiment(&setup).map_err(CliError::harness)?,
        ExperimentConfig::Theorem52(setup) => run_theorem52_experiment(&setup).map_err(CliError::harness)?,
        ExperimentConfig::Theorem53(setup) => run_theorem53_experiment(&setup).map_err(CliError::harness)?,
        ExperimentConfig::Constant { domain, diffusion, run } => {
            let spec = constant_experiment_spec(domain, diffusion, run);
            run_experiment(&spec).map_err(CliError::harness)?
        }
    };
    write_json(ctx.out_dir, "report.json", &output.report)?;
    ctx.record("report.json");
    write_text(ctx.out_dir, "report.txt", &output.report.to_table())?;
    ctx.record("report.txt");
    write_text(ctx.out_dir, "samples.csv", &output.samples.to_csv())?;
    ctx.record("samples.csv");
    Ok(match output.report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail | Verdict::Refused => 2,
    })
}

fn constant_experiment_spec(
    domain: Domain<f64>,
    diffusion: DiffusionSpec<f64>,
    run: RunParams,
) -> ExperimentSpec {
    let limit = (domain.clone(), diffusion);
    let member = limit.clone();
    let member_problem: Arc<
        dyn Fn(u32) -> Result<(Domain<f64>, DiffusionSpec<f64>), HarnessError> + Send + Sync,
    > = Arc::new(move |_n| Ok(member.clone()));
    let check_condition_b = domain.as_polyhedron().map_or(false, |p| p.num_faces() >= 2);
    let probes = ProbeSet::new(run.probe_region.clone(), run.probe_resolution);
    ExperimentSpec {
        theorem: "constant".into(),
        dim: domain.dim(),
        indices: run.indices.clone(),
        horizon: run.horizon,
        dt: run.dt,
        n_paths: run.n_paths,
        base_seed: run.base_seed,
        eps_v: run.eps_v,
        limit_kind: LimitKind::Reflected,
        member_problem,
        limit_problem: limit,
        diagnostics: DiagnosticsSpec {
            domains: Some(DomainSequence::new(
                domain.dim(),
                {
                    let d = domain.clone();
                    move |_| Ok(SeqDomain::Exact(d.clone()))
                },
                SeqDomain::Exact(domain),
            )),
            fields: Vec::new(),
            probes,
            check_condition_b,
            containment: None,
            extra_series: BTreeMap::new(),
        },
        functionals: Functional::ALL.to_vec(),
        modulus_delta: tol::MODULUS_DELTA,
        unsound_override: run.unsound_override,
    }
}
