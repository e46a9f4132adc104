//! Discretized reflected diffusion: Euler-Maruyama proposals followed by an
//! exact one-step Skorokhod correction, with explicit local time and
//! stopping at the exceptional-set collar.

use super::correction::{oblique_correction_smooth, PolyhedralStepper, StepCorrection};
use super::rng::PathRng;
use super::SimError;
use crate::geometry::{Domain, Puncture};
use crate::linalg::{self, Mat};
use crate::model::{DiffusionSpec, ReflectionField, ReflectionMatrix};
use crate::scalar::Scalar;
use crate::tol;

/// One discretized trajectory with its local-time bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSample<F> {
    pub path_id: u64,
    /// Seed of this path's own generator (derived from the ensemble seed).
    pub rng_seed: u64,
    pub dim: usize,
    pub dt: F,
    /// States Z_0..Z_n, row-major (n+1 rows of `dim`).
    pub states: Vec<F>,
    /// Cumulative scalar local time l_0..l_n.
    pub local_time: Vec<F>,
    /// Cumulative reflection term L_0..L_n, row-major.
    pub reflection: Vec<F>,
    /// Cumulative per-face local times (polyhedra), row-major n+1 x m.
    pub face_local_time: Option<Vec<F>>,
    /// First step index within the exceptional-set collar, if any.
    pub tau_v: Option<usize>,
}

impl<F: Scalar> PathSample<F> {
    pub fn n_steps(&self) -> usize {
        self.local_time.len() - 1
    }

    pub fn state(&self, k: usize) -> &[F] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn terminal(&self) -> &[F] {
        self.state(self.n_steps())
    }

    pub fn reflection_at(&self, k: usize) -> &[F] {
        &self.reflection[k * self.dim..(k + 1) * self.dim]
    }

    pub fn time(&self, k: usize) -> F {
        F::from_f64_c(k as f64) * self.dt
    }

    pub fn total_local_time(&self) -> F {
        *self.local_time.last().unwrap()
    }

    pub fn is_stopped(&self) -> bool {
        self.tau_v.is_some()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimOptions<F> {
    pub horizon: F,
    pub dt: F,
    /// Stopping collar around the exceptional set V.
    pub eps_v: F,
}

impl<F: Scalar> Default for SimOptions<F> {
    fn default() -> Self {
        Self {
            horizon: F::from_f64_c(tol::T_DEFAULT),
            dt: F::from_f64_c(tol::DT_DEFAULT),
            eps_v: F::from_f64_c(tol::EPS_V_DEFAULT),
        }
    }
}

impl<F: Scalar> SimOptions<F> {
    pub fn new(horizon: F, dt: F) -> Self {
        Self { horizon, dt, ..Self::default() }
    }

    pub fn n_steps(&self) -> usize {
        let n = (self.horizon / self.dt).to_f64_c().round() as usize;
        n.max(1)
    }
}

/// Immutable per-problem simulator; one instance drives any number of paths
/// concurrently.
pub struct Simulator<'a, F> {
    domain: &'a Domain<F>,
    spec: &'a DiffusionSpec<F>,
    opts: SimOptions<F>,
    n_steps: usize,
    sqrt_dt: F,
    drift_dt_const: Option<Vec<F>>,
    sigma_dt_const: Option<Mat<F>>,
    guard_const: Option<F>,
    poly: Option<PolyhedralStepper<F>>,
    has_exceptional: bool,
}

impl<'a, F: Scalar> Simulator<'a, F> {
    pub fn new(
        domain: &'a Domain<F>,
        spec: &'a DiffusionSpec<F>,
        opts: SimOptions<F>,
    ) -> Result<Self, SimError> {
        let d = domain.dim();
        if spec.dim() != d {
            return Err(SimError::Model(crate::model::ModelError::DimensionMismatch {
                expected: d,
                got: spec.dim(),
            }));
        }
        if !(opts.dt > F::zero()) || !(opts.horizon > F::zero()) {
            return Err(SimError::InvalidInput("horizon and dt must be positive".into()));
        }
        let phi0 = domain.signed_distance(&spec.start)?;
        if phi0 < -F::tol(tol::FEASIBILITY) {
            return Err(SimError::StartOutsideDomain);
        }
        spec.validate_at(std::slice::from_ref(&spec.start))?;
        let sqrt_dt = opts.dt.sqrt();
        let drift_dt_const = spec
            .drift
            .as_constant()
            .map(|g| g.iter().map(|&c| c * opts.dt).collect());
        let (sigma_dt_const, guard_const) = match spec.covariance.as_constant() {
            Some(a) => {
                let sigma = crate::model::psd_sqrt(a)?;
                let guard = F::from_f64_c(tol::STEP_GUARD_FACTOR)
                    * (opts.dt * a.frobenius_norm()).sqrt();
                (Some(sigma.scaled(sqrt_dt)), Some(guard))
            }
            None => (None, None),
        };
        let poly = match domain {
            Domain::Polyhedron(p) => {
                let m = p.num_faces();
                let r = match &spec.reflection {
                    ReflectionField::Normal => {
                        let mut cols = Mat::zeros(d, m);
                        for i in 0..m {
                            for row in 0..d {
                                cols[(row, i)] = p.normal(i)[row];
                            }
                        }
                        ReflectionMatrix(cols)
                    }
                    ReflectionField::Constant(v) => {
                        let mut cols = Mat::zeros(d, m);
                        for i in 0..m {
                            for row in 0..d {
                                cols[(row, i)] = v[row];
                            }
                        }
                        ReflectionMatrix(cols)
                    }
                    ReflectionField::PerFace(r) => r.clone(),
                    ReflectionField::Custom(_) => return Err(SimError::UnsupportedDomain),
                };
                Some(PolyhedralStepper::new(p, &r)?)
            }
            _ => None,
        };
        let has_exceptional = match domain {
            Domain::Polyhedron(p) => p.num_faces() >= 2,
            Domain::PuncturedSpace { excluded, .. } => {
                excluded.iter().any(|c| matches!(c, Puncture::Affine { .. }))
            }
            _ => false,
        };
        Ok(Self {
            domain,
            spec,
            opts,
            n_steps: opts.n_steps(),
            sqrt_dt,
            drift_dt_const,
            sigma_dt_const,
            guard_const,
            poly,
            has_exceptional,
        })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    fn near_exceptional(&self, z: &[F]) -> Result<bool, SimError> {
        let eps = self.opts.eps_v;
        match self.domain {
            Domain::Polyhedron(p) => {
                let m = p.num_faces();
                let margins: Vec<F> = (0..m).map(|i| p.margin(i, z).abs()).collect();
                for i in 0..m {
                    for j in (i + 1)..m {
                        // dist(z, face_i intersect face_j) >= max of the two
                        // hyperplane distances.
                        if margins[i].max(margins[j]) < eps {
                            if let Some(proj) = p.project(z, &[i, j], F::zero()) {
                                if proj.distance < eps {
                                    return Ok(true);
                                }
                            }
                        }
                    }
                }
                Ok(false)
            }
            Domain::PuncturedSpace { .. } => {
                Ok(self.domain.exceptional_set_distance(z)? < eps)
            }
            _ => Ok(false),
        }
    }

    fn correct(&self, z: &[F], y: &[F], guard: F) -> Result<StepCorrection<F>, SimError> {
        match self.domain {
            Domain::WholeSpace { .. } => Ok(StepCorrection {
                proposal: y.to_vec(),
                corrected: y.to_vec(),
                local_time_increment: F::zero(),
                reflection_increment: vec![F::zero(); y.len()],
                face_increments: None,
                iterations: 0,
            }),
            Domain::Polyhedron(p) => self.poly.as_ref().unwrap().step(p, y),
            _ => self.smooth_guarded(z, y, guard),
        }
    }

    /// Ray correction with the locality guard: an oversized push re-applies
    /// the same proposal displacement in halved sub-steps (no fresh
    /// randomness, so same-seed couplings stay bitwise intact).
    fn smooth_guarded(&self, z: &[F], y: &[F], guard: F) -> Result<StepCorrection<F>, SimError> {
        let c0 = oblique_correction_smooth(self.domain, &self.spec.reflection, y)?;
        if c0.local_time_increment == F::zero()
            || linalg::distance(&c0.corrected, y) <= guard
        {
            return Ok(c0);
        }
        let disp = linalg::sub(y, z);
        let mut last = c0;
        for level in 1..=tol::STEP_HALVING_MAX {
            let parts = 1usize << level;
            let scale = F::one() / F::from_f64_c(parts as f64);
            let mut cur = z.to_vec();
            let mut dl = F::zero();
            let mut dvec = vec![F::zero(); y.len()];
            let mut iterations = 0usize;
            let mut max_push = F::zero();
            let mut failed = None;
            for _ in 0..parts {
                let mut prop = cur.clone();
                linalg::axpy(&mut prop, scale, &disp);
                match oblique_correction_smooth(self.domain, &self.spec.reflection, &prop) {
                    Ok(c) => {
                        max_push = max_push.max(linalg::distance(&c.corrected, &prop));
                        dl = dl + c.local_time_increment;
                        for (acc, &v) in dvec.iter_mut().zip(&c.reflection_increment) {
                            *acc = *acc + v;
                        }
                        iterations += c.iterations;
                        cur = c.corrected;
                    }
                    Err(e) => {
                        failed = Some(e);
                        break;
                    }
                }
            }
            if let Some(e) = failed {
                if level == tol::STEP_HALVING_MAX {
                    return Err(e);
                }
                continue;
            }
            last = StepCorrection {
                proposal: y.to_vec(),
                corrected: cur,
                local_time_increment: dl,
                reflection_increment: dvec,
                face_increments: None,
                iterations,
            };
            if max_push <= guard {
                break;
            }
        }
        Ok(last)
    }

    /// Simulate one path from the spec's start point.
    pub fn simulate(&self, path_id: u64, rng_seed: u64) -> Result<PathSample<F>, SimError> {
        let d = self.domain.dim();
        let n = self.n_steps;
        let m_faces = self.domain.as_polyhedron().map(|p| p.num_faces());
        let mut states = Vec::with_capacity((n + 1) * d);
        let mut local_time = Vec::with_capacity(n + 1);
        let mut reflection = Vec::with_capacity((n + 1) * d);
        let mut face_local = m_faces.map(|m| Vec::with_capacity((n + 1) * m));

        let mut z = self.spec.start.clone();
        let mut l = F::zero();
        let mut bigl = vec![F::zero(); d];
        let mut face_acc = m_faces.map(|m| vec![F::zero(); m]);

        states.extend_from_slice(&z);
        local_time.push(l);
        reflection.extend_from_slice(&bigl);
        if let (Some(buf), Some(acc)) = (face_local.as_mut(), face_acc.as_ref()) {
            buf.extend_from_slice(acc);
        }

        let mut tau_v = None;
        if self.has_exceptional && self.near_exceptional(&z).map_err(|e| e.at_step(0))? {
            tau_v = Some(0);
        }

        let mut rng = PathRng::new(rng_seed);
        let mut xi = vec![F::zero(); d];
        let mut y = vec![F::zero(); d];

        for k in 0..n {
            if tau_v.is_some() {
                break;
            }
            rng.fill_normals(&mut xi);
            // Proposal y = z + g dt + sigma sqrt(dt) xi.
            match &self.drift_dt_const {
                Some(gdt) => {
                    for i in 0..d {
                        y[i] = z[i] + gdt[i];
                    }
                }
                None => {
                    let g = self.spec.drift.eval(&z);
                    for i in 0..d {
                        y[i] = z[i] + g[i] * self.opts.dt;
                    }
                }
            }
            let guard;
            match &self.sigma_dt_const {
                Some(sig) => {
                    for i in 0..d {
                        let row = sig.row(i);
                        let mut acc = F::zero();
                        for j in 0..d {
                            acc = acc + row[j] * xi[j];
                        }
                        y[i] = y[i] + acc;
                    }
                    guard = self.guard_const.unwrap();
                }
                None => {
                    let a = self.spec.covariance.eval(&z);
                    let sig = crate::model::psd_sqrt(&a).map_err(SimError::Model).map_err(|e| e.at_step(k))?;
                    for i in 0..d {
                        let row = sig.row(i);
                        let mut acc = F::zero();
                        for j in 0..d {
                            acc = acc + row[j] * xi[j];
                        }
                        y[i] = y[i] + acc * self.sqrt_dt;
                    }
                    guard = F::from_f64_c(tol::STEP_GUARD_FACTOR)
                        * (self.opts.dt * a.frobenius_norm()).sqrt();
                }
            }
            let corr = self.correct(&z, &y, guard).map_err(|e| e.at_step(k))?;
            z = corr.corrected;
            l = l + corr.local_time_increment;
            for (acc, &v) in bigl.iter_mut().zip(&corr.reflection_increment) {
                *acc = *acc + v;
            }
            if let (Some(acc), Some(df)) = (face_acc.as_mut(), corr.face_increments.as_ref()) {
                for (a, &v) in acc.iter_mut().zip(df) {
                    *a = *a + v;
                }
            }
            states.extend_from_slice(&z);
            local_time.push(l);
            reflection.extend_from_slice(&bigl);
            if let (Some(buf), Some(acc)) = (face_local.as_mut(), face_acc.as_ref()) {
                buf.extend_from_slice(acc);
            }
            if self.has_exceptional && self.near_exceptional(&z).map_err(|e| e.at_step(k + 1))? {
                tau_v = Some(k + 1);
            }
        }
        // Frozen tail after tau_V: the stopped process stays put.
        while local_time.len() < n + 1 {
            states.extend_from_within(states.len() - d..);
            local_time.push(l);
            reflection.extend_from_within(reflection.len() - d..);
            if let Some(buf) = face_local.as_mut() {
                let m = m_faces.unwrap();
                buf.extend_from_within(buf.len() - m..);
            }
        }
        Ok(PathSample {
            path_id,
            rng_seed,
            dim: d,
            dt: self.opts.dt,
            states,
            local_time,
            reflection,
            face_local_time: face_local,
            tau_v,
        })
    }
}

/// Simulate a single path (convenience wrapper over [`Simulator`]).
pub fn simulate_path<F: Scalar>(
    domain: &Domain<F>,
    spec: &DiffusionSpec<F>,
    horizon: F,
    dt: F,
    seed: u64,
) -> Result<PathSample<F>, SimError> {
    Simulator::new(domain, spec, SimOptions::new(horizon, dt))?.simulate(0, seed)
}
