//! Config parsing and validation. The format is a TOML key-value tree (the
//! exact subset is documented in docs/config-grammar.md, with a conformance
//! fixture under fixtures/). Every validation failure names the offending
//! key path and the violated invariant.

use reflectolab_core::convergence::DomainSequence;
use reflectolab_core::geometry::{Domain, ProbeSet, Puncture, Region};
use reflectolab_core::harness::{
    DecayKind, RunParams, Theorem32Setup, Theorem52Setup, Theorem53Setup,
};
use reflectolab_core::linalg::Mat;
use reflectolab_core::model::{
    DiffusionSpec, MatrixField, ReflectionField, ReflectionMatrix, VectorField,
};
use reflectolab_core::tol;
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    pub fn at(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Validation { key: key.into(), message: message.into() }
    }
}

pub fn parse_toml(text: &str) -> Result<Value, ConfigError> {
    text.parse::<Value>().map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| {
                let prefix = &text[..span.start.min(text.len())];
                let line = prefix.bytes().filter(|&b| b == b'\n').count() + 1;
                let column = prefix.len() - prefix.rfind('\n').map_or(0, |p| p + 1) + 1;
                (line, column)
            })
            .unwrap_or((0, 0));
        ConfigError::Parse { line, column, message: e.message().to_string() }
    })
}

fn get<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, ConfigError> {
    v.get(key).ok_or_else(|| ConfigError::at(join(path, key), "missing required key"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_f64(v: &Value, path: &str) -> Result<f64, ConfigError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::at(path, "expected a number")),
    }
}

fn as_u64(v: &Value, path: &str) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(ConfigError::at(path, "expected a nonnegative integer")),
    }
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| ConfigError::at(path, "expected a string"))
}

fn as_bool(v: &Value, path: &str) -> Result<bool, ConfigError> {
    v.as_bool().ok_or_else(|| ConfigError::at(path, "expected a boolean"))
}

fn vector(v: &Value, path: &str) -> Result<Vec<f64>, ConfigError> {
    let arr = v.as_array().ok_or_else(|| ConfigError::at(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| as_f64(x, &format!("{path}[{i}]")))
        .collect()
}

fn matrix(v: &Value, path: &str) -> Result<Mat<f64>, ConfigError> {
    let arr = v.as_array().ok_or_else(|| ConfigError::at(path, "expected an array of rows"))?;
    let mut rows = Vec::new();
    for (i, r) in arr.iter().enumerate() {
        rows.push(vector(r, &format!("{path}[{i}]"))?);
    }
    if rows.is_empty() {
        return Err(ConfigError::at(path, "matrix must have at least one row"));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(ConfigError::at(path, "matrix rows must have equal length"));
    }
    Ok(Mat::from_rows(&rows))
}

fn opt_f64(v: &Value, key: &str, path: &str, default: f64) -> Result<f64, ConfigError> {
    match v.get(key) {
        Some(x) => as_f64(x, &join(path, key)),
        None => Ok(default),
    }
}

fn opt_u32_list(v: &Value, key: &str, path: &str, default: Vec<u32>) -> Result<Vec<u32>, ConfigError> {
    match v.get(key) {
        Some(x) => {
            let p = join(path, key);
            let arr = x.as_array().ok_or_else(|| ConfigError::at(&p, "expected an array of indices"))?;
            arr.iter()
                .enumerate()
                .map(|(i, e)| as_u64(e, &format!("{p}[{i}]")).map(|u| u as u32))
                .collect()
        }
        None => Ok(default),
    }
}

/// [domain] table -> Domain.
pub fn domain(v: &Value, path: &str) -> Result<Domain<f64>, ConfigError> {
    let kind = as_str(get(v, "kind", path)?, &join(path, "kind"))?;
    let wrap = |key: &str, e: reflectolab_core::geometry::GeometryError| {
        ConfigError::at(join(path, key), e.to_string())
    };
    match kind {
        "polyhedron" => {
            let normals_v = get(v, "normals", path)?;
            let arr = normals_v
                .as_array()
                .ok_or_else(|| ConfigError::at(join(path, "normals"), "expected an array of vectors"))?;
            let mut normals = Vec::new();
            for (i, n) in arr.iter().enumerate() {
                normals.push(vector(n, &format!("{}[{i}]", join(path, "normals")))?);
            }
            let offsets = vector(get(v, "offsets", path)?, &join(path, "offsets"))?;
            Domain::polyhedron(normals, offsets).map_err(|e| wrap("normals", e))
        }
        "orthant" => {
            let dim = as_u64(get(v, "dim", path)?, &join(path, "dim"))? as usize;
            if dim == 0 {
                return Err(ConfigError::at(join(path, "dim"), "dimension must be positive"));
            }
            Ok(Domain::orthant(dim))
        }
        "ball" => {
            let center = vector(get(v, "center", path)?, &join(path, "center"))?;
            let radius = as_f64(get(v, "radius", path)?, &join(path, "radius"))?;
            Domain::ball(center, radius).map_err(|e| wrap("radius", e))
        }
        "half_space" => {
            let normal = vector(get(v, "normal", path)?, &join(path, "normal"))?;
            let offset = as_f64(get(v, "offset", path)?, &join(path, "offset"))?;
            Domain::half_space(normal, offset).map_err(|e| wrap("normal", e))
        }
        "whole_space" => {
            let dim = as_u64(get(v, "dim", path)?, &join(path, "dim"))? as usize;
            Ok(Domain::whole_space(dim))
        }
        "punctured" => {
            let dim = as_u64(get(v, "dim", path)?, &join(path, "dim"))? as usize;
            let comps_v = get(v, "excluded", path)?;
            let arr = comps_v
                .as_array()
                .ok_or_else(|| ConfigError::at(join(path, "excluded"), "expected an array of components"))?;
            let mut comps = Vec::new();
            for (i, c) in arr.iter().enumerate() {
                let cpath = format!("{}[{i}]", join(path, "excluded"));
                let ckind = as_str(get(c, "kind", &cpath)?, &join(&cpath, "kind"))?;
                comps.push(match ckind {
                    "point" => Puncture::Affine {
                        base: vector(get(c, "point", &cpath)?, &join(&cpath, "point"))?,
                        basis: vec![],
                    },
                    "affine" => {
                        let base = vector(get(c, "base", &cpath)?, &join(&cpath, "base"))?;
                        let basis_v = get(c, "basis", &cpath)?;
                        let basis_arr = basis_v.as_array().ok_or_else(|| {
                            ConfigError::at(join(&cpath, "basis"), "expected an array of vectors")
                        })?;
                        let mut basis = Vec::new();
                        for (j, b) in basis_arr.iter().enumerate() {
                            basis.push(vector(b, &format!("{}[{j}]", join(&cpath, "basis")))?);
                        }
                        Puncture::Affine { base, basis }
                    }
                    "ball" => Puncture::ClosedBall {
                        center: vector(get(c, "center", &cpath)?, &join(&cpath, "center"))?,
                        radius: as_f64(get(c, "radius", &cpath)?, &join(&cpath, "radius"))?,
                    },
                    other => {
                        return Err(ConfigError::at(
                            join(&cpath, "kind"),
                            format!("unknown puncture kind `{other}`"),
                        ))
                    }
                });
            }
            Domain::punctured(dim, comps).map_err(|e| wrap("excluded", e))
        }
        other => Err(ConfigError::at(join(path, "kind"), format!("unknown domain kind `{other}`"))),
    }
}

/// [diffusion] table -> DiffusionSpec, validated at the start point.
pub fn diffusion(v: &Value, path: &str, domain: &Domain<f64>) -> Result<DiffusionSpec<f64>, ConfigError> {
    let start = vector(get(v, "start", path)?, &join(path, "start"))?;
    let dim = domain.dim();
    if start.len() != dim {
        return Err(ConfigError::at(
            join(path, "start"),
            format!("start has dimension {}, domain has {}", start.len(), dim),
        ));
    }
    let drift = match v.get("drift") {
        Some(d) => VectorField::Constant(vector(d, &join(path, "drift"))?),
        None => VectorField::zero(dim),
    };
    let covariance = match v.get("covariance") {
        Some(c) => MatrixField::Constant(matrix(c, &join(path, "covariance"))?),
        None => MatrixField::identity(dim),
    };
    let reflection = match v.get("reflection") {
        None => ReflectionField::Normal,
        Some(r) => {
            let rpath = join(path, "reflection");
            let kind = as_str(get(r, "kind", &rpath)?, &join(&rpath, "kind"))?;
            match kind {
                "normal" => ReflectionField::Normal,
                "constant" => ReflectionField::Constant(vector(
                    get(r, "vector", &rpath)?,
                    &join(&rpath, "vector"),
                )?),
                "matrix" => {
                    let m = matrix(get(r, "matrix", &rpath)?, &join(&rpath, "matrix"))?;
                    ReflectionField::PerFace(ReflectionMatrix(m))
                }
                other => {
                    return Err(ConfigError::at(
                        join(&rpath, "kind"),
                        format!("unknown reflection kind `{other}`"),
                    ))
                }
            }
        }
    };
    let spec = DiffusionSpec { drift, covariance, reflection, start };
    spec.validate_at(std::slice::from_ref(&spec.start))
        .map_err(|e| ConfigError::at(join(path, "covariance"), e.to_string()))?;
    let phi = domain
        .signed_distance(&spec.start)
        .map_err(|e| ConfigError::at(join(path, "start"), e.to_string()))?;
    if phi < -1e-9 {
        return Err(ConfigError::at(join(path, "start"), "start point lies outside the domain closure"));
    }
    Ok(spec)
}

/// [probes] table -> ProbeSet.
pub fn probes(v: &Value, path: &str) -> Result<ProbeSet<f64>, ConfigError> {
    let region_v = get(v, "region", path)?;
    let rpath = join(path, "region");
    let kind = as_str(get(region_v, "kind", &rpath)?, &join(&rpath, "kind"))?;
    let region = match kind {
        "box" => {
            let lo = vector(get(region_v, "lo", &rpath)?, &join(&rpath, "lo"))?;
            let hi = vector(get(region_v, "hi", &rpath)?, &join(&rpath, "hi"))?;
            if lo.len() != hi.len() {
                return Err(ConfigError::at(&rpath, "lo and hi must have equal length"));
            }
            if lo.iter().zip(&hi).any(|(a, b)| a > b) {
                return Err(ConfigError::at(&rpath, "lo must be <= hi componentwise"));
            }
            Region::Box { lo, hi }
        }
        "ball" => Region::Ball {
            center: vector(get(region_v, "center", &rpath)?, &join(&rpath, "center"))?,
            radius: as_f64(get(region_v, "radius", &rpath)?, &join(&rpath, "radius"))?,
        },
        other => return Err(ConfigError::at(join(&rpath, "kind"), format!("unknown region kind `{other}`"))),
    };
    let resolution = opt_f64(v, "resolution", path, tol::GRID_H_DEFAULT)?;
    if resolution <= 0.0 {
        return Err(ConfigError::at(join(path, "resolution"), "resolution must be positive"));
    }
    let mut set = ProbeSet::new(region, resolution);
    if let Some(extra) = v.get("extra") {
        let p = join(path, "extra");
        let arr = extra.as_array().ok_or_else(|| ConfigError::at(&p, "expected an array of points"))?;
        let mut pts = Vec::new();
        for (i, e) in arr.iter().enumerate() {
            pts.push(vector(e, &format!("{p}[{i}]"))?);
        }
        set = set.with_extra(pts);
    }
    Ok(set)
}

fn decay(v: &Value, path: &str) -> Result<DecayKind, ConfigError> {
    match v.get("decay") {
        None => Ok(DecayKind::InverseIndex),
        Some(d) => match as_str(d, &join(path, "decay"))? {
            "inverse" => Ok(DecayKind::InverseIndex),
            "geometric" => Ok(DecayKind::Geometric),
            other => Err(ConfigError::at(join(path, "decay"), format!("unknown decay `{other}`"))),
        },
    }
}

/// The shipped parametric domain families for `domain-convergence`.
pub fn domain_sequence(v: &Value, path: &str) -> Result<DomainSequence<f64>, ConfigError> {
    let family = as_str(get(v, "family", path)?, &join(path, "family"))?;
    match family {
        "constant" => {
            let d = domain(get(v, "domain", path)?, &join(path, "domain"))?;
            Ok(DomainSequence::constant(d))
        }
        "balls" => {
            let cb = vector(get(v, "center_base", path)?, &join(path, "center_base"))?;
            let cp = match v.get("center_perturbation") {
                Some(x) => vector(x, &join(path, "center_perturbation"))?,
                None => vec![0.0; cb.len()],
            };
            if cp.len() != cb.len() {
                return Err(ConfigError::at(
                    join(path, "center_perturbation"),
                    "length must match center_base",
                ));
            }
            let rb = as_f64(get(v, "radius_base", path)?, &join(path, "radius_base"))?;
            let rp = opt_f64(v, "radius_perturbation", path, 0.0)?;
            let dk = decay(v, path)?;
            let limit = Domain::ball(cb.clone(), rb)
                .map_err(|e| ConfigError::at(join(path, "radius_base"), e.to_string()))?;
            Ok(DomainSequence::ball_family(
                move |n| cb.iter().zip(&cp).map(|(&b, &p)| b + p * dk.eval(n)).collect(),
                move |n| rb + rp * dk.eval(n),
                limit,
            ))
        }
        "expanding_balls" => {
            let center = vector(get(v, "center", path)?, &join(path, "center"))?;
            Ok(DomainSequence::expanding_balls(center))
        }
        "slit" => Ok(DomainSequence::slit_strip()),
        "polyhedron_ladder" => {
            let base_n = matrix(get(v, "base_normals", path)?, &join(path, "base_normals"))?;
            let base_b = vector(get(v, "base_offsets", path)?, &join(path, "base_offsets"))?;
            let pert_n = match v.get("normal_perturbations") {
                Some(x) => matrix(x, &join(path, "normal_perturbations"))?,
                None => Mat::zeros(base_n.rows(), base_n.cols()),
            };
            let pert_b = match v.get("offset_perturbations") {
                Some(x) => vector(x, &join(path, "offset_perturbations"))?,
                None => vec![0.0; base_b.len()],
            };
            if base_n.rows() != base_b.len() || pert_n.rows() != base_n.rows() || pert_b.len() != base_b.len() {
                return Err(ConfigError::at(path, "face arrays must have matching lengths"));
            }
            let dk = decay(v, path)?;
            let limit_normals: Vec<Vec<f64>> = (0..base_n.rows()).map(|i| base_n.row(i).to_vec()).collect();
            let limit = Domain::polyhedron(limit_normals.clone(), base_b.clone())
                .map_err(|e| ConfigError::at(join(path, "base_normals"), e.to_string()))?;
            let rows = base_n.rows();
            Ok(DomainSequence::polyhedron_family(
                move |n| {
                    let d = dk.eval(n);
                    let normals: Vec<Vec<f64>> = (0..rows)
                        .map(|i| {
                            let mut nv: Vec<f64> = base_n
                                .row(i)
                                .iter()
                                .zip(pert_n.row(i))
                                .map(|(&b, &p)| b + p * d)
                                .collect();
                            let norm = reflectolab_core::linalg::norm(&nv);
                            for x in &mut nv {
                                *x /= norm;
                            }
                            nv
                        })
                        .collect();
                    let offsets = base_b.iter().zip(&pert_b).map(|(&b, &p)| b + p * d).collect();
                    (normals, offsets)
                },
                limit,
            ))
        }
        "shrinking_puncture" => {
            let center = vector(get(v, "center", path)?, &join(path, "center"))?;
            let dim = center.len();
            let c2 = center.clone();
            let limit = Domain::punctured(dim, vec![Puncture::Affine { base: center.clone(), basis: vec![] }])
                .map_err(|e| ConfigError::at(join(path, "center"), e.to_string()))?;
            Ok(DomainSequence::new(
                dim,
                move |n| {
                    Ok(reflectolab_core::convergence::SeqDomain::Exact(Domain::punctured(
                        c2.len(),
                        vec![Puncture::ClosedBall { center: c2.clone(), radius: 1.0 / n as f64 }],
                    )?))
                },
                reflectolab_core::convergence::SeqDomain::Exact(limit),
            ))
        }
        other => Err(ConfigError::at(join(path, "family"), format!("unknown family `{other}`"))),
    }
}

fn run_params(v: &Value, path: &str, dim: usize, seed: u64, unsound: bool) -> Result<RunParams, ConfigError> {
    let mut run = RunParams::new(dim, 0, seed);
    run.indices = opt_u32_list(v, "indices", path, reflectolab_core::harness::default_indices())?;
    run.horizon = opt_f64(v, "horizon", path, tol::T_DEFAULT)?;
    run.dt = opt_f64(v, "dt", path, tol::DT_DEFAULT)?;
    run.n_paths = as_u64(get(v, "paths", path)?, &join(path, "paths"))?;
    if run.n_paths == 0 {
        return Err(ConfigError::at(join(path, "paths"), "need at least one path"));
    }
    run.eps_v = opt_f64(v, "eps_v", path, tol::EPS_V_DEFAULT)?;
    run.unsound_override = unsound;
    if let Some(p) = v.get("probes") {
        let set = probes(p, &join(path, "probes"))?;
        run.probe_region = set.region.clone();
        run.probe_resolution = set.resolution;
    }
    Ok(run)
}

/// Theorem-specific experiment setups.
pub enum ExperimentConfig {
    Theorem32(Theorem32Setup),
    Theorem52(Theorem52Setup),
    Theorem53(Theorem53Setup),
    /// Constant-sequence sanity experiment (same law at every index).
    Constant {
        domain: Domain<f64>,
        diffusion: DiffusionSpec<f64>,
        run: RunParams,
    },
}

pub fn experiment(v: &Value, seed: u64, unsound: bool) -> Result<ExperimentConfig, ConfigError> {
    let exp = get(v, "experiment", "")?;
    let theorem = as_str(get(exp, "theorem", "experiment")?, "experiment.theorem")?;
    match theorem {
        "theorem32" => {
            let lad = get(v, "ladder", "")?;
            let path = "ladder";
            let base_normals_m = matrix(get(lad, "base_normals", path)?, &join(path, "base_normals"))?;
            let base_normals: Vec<Vec<f64>> =
                (0..base_normals_m.rows()).map(|i| base_normals_m.row(i).to_vec()).collect();
            let m = base_normals.len();
            let dim = base_normals.first().map_or(0, |n| n.len());
            let base_start = vector(get(lad, "base_start", path)?, &join(path, "base_start"))?;
            let run = run_params(exp, "experiment", dim, seed, unsound)?;
            let mut setup = Theorem32Setup::orthant(dim, base_start, run);
            setup.base_normals = base_normals;
            setup.normal_perturbations = match lad.get("normal_perturbations") {
                Some(x) => {
                    let mm = matrix(x, &join(path, "normal_perturbations"))?;
                    (0..mm.rows()).map(|i| mm.row(i).to_vec()).collect()
                }
                None => vec![vec![0.0; dim]; m],
            };
            setup.base_offsets = vector(get(lad, "base_offsets", path)?, &join(path, "base_offsets"))?;
            setup.offset_perturbations = match lad.get("offset_perturbations") {
                Some(x) => vector(x, &join(path, "offset_perturbations"))?,
                None => vec![0.0; m],
            };
            if let Some(x) = lad.get("base_reflection") {
                setup.base_reflection = matrix(x, &join(path, "base_reflection"))?;
            }
            if let Some(x) = lad.get("reflection_perturbation") {
                setup.reflection_perturbation = matrix(x, &join(path, "reflection_perturbation"))?;
            } else {
                setup.reflection_perturbation =
                    Mat::zeros(setup.base_reflection.rows(), setup.base_reflection.cols());
            }
            if let Some(x) = lad.get("base_drift") {
                setup.base_drift = vector(x, &join(path, "base_drift"))?;
            }
            if let Some(x) = lad.get("drift_perturbation") {
                setup.drift_perturbation = vector(x, &join(path, "drift_perturbation"))?;
            }
            if let Some(x) = lad.get("base_covariance") {
                setup.base_covariance = matrix(x, &join(path, "base_covariance"))?;
            }
            if let Some(x) = lad.get("covariance_perturbation") {
                setup.covariance_perturbation = matrix(x, &join(path, "covariance_perturbation"))?;
            } else {
                setup.covariance_perturbation =
                    Mat::zeros(setup.base_covariance.rows(), setup.base_covariance.cols());
            }
            if let Some(x) = lad.get("start_perturbation") {
                setup.start_perturbation = vector(x, &join(path, "start_perturbation"))?;
            }
            setup.decay = decay(lad, path)?;
            Ok(ExperimentConfig::Theorem32(setup))
        }
        "theorem52" => {
            let ex = get(v, "expanding", "")?;
            let path = "expanding";
            let center = vector(get(ex, "center", path)?, &join(path, "center"))?;
            let dim = center.len();
            let start = vector(get(ex, "start", path)?, &join(path, "start"))?;
            let drift = match ex.get("drift") {
                Some(x) => vector(x, &join(path, "drift"))?,
                None => vec![0.0; dim],
            };
            let covariance = match ex.get("covariance") {
                Some(x) => matrix(x, &join(path, "covariance"))?,
                None => Mat::identity(dim),
            };
            let containment_radius = opt_f64(ex, "containment_radius", path, 1.0)?;
            let run = run_params(exp, "experiment", dim, seed, unsound)?;
            Ok(ExperimentConfig::Theorem52(Theorem52Setup {
                center,
                drift,
                covariance,
                start,
                containment_radius,
                run,
            }))
        }
        "theorem53" => {
            let pu = get(v, "puncture", "")?;
            let path = "puncture";
            let center = vector(get(pu, "center", path)?, &join(path, "center"))?;
            let dim = center.len();
            let start = vector(get(pu, "start", path)?, &join(path, "start"))?;
            let drift = match pu.get("drift") {
                Some(x) => vector(x, &join(path, "drift"))?,
                None => vec![0.0; dim],
            };
            let covariance = match pu.get("covariance") {
                Some(x) => matrix(x, &join(path, "covariance"))?,
                None => Mat::identity(dim),
            };
            let run = run_params(exp, "experiment", dim, seed, unsound)?;
            Ok(ExperimentConfig::Theorem53(Theorem53Setup { puncture: center, drift, covariance, start, run }))
        }
        "constant" => {
            let d = domain(get(v, "domain", "")?, "domain")?;
            let spec = diffusion(get(v, "diffusion", "")?, "diffusion", &d)?;
            let run = run_params(exp, "experiment", d.dim(), seed, unsound)?;
            Ok(ExperimentConfig::Constant { domain: d, diffusion: spec, run })
        }
        other => Err(ConfigError::at("experiment.theorem", format!("unknown theorem `{other}`"))),
    }
}
