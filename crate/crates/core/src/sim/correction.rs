//! One-step Skorokhod corrections: the projected Gauss-Seidel LCP for
//! polyhedra, the oblique ray correction for smooth boundaries, and the
//! closed-form half-line Skorokhod map used as a one-dimensional oracle.

use super::SimError;
use crate::geometry::{Domain, GeometryError, Polyhedron, Puncture};
use crate::linalg::{self, axpy, dot, Mat};
use crate::model::{normalize_reflection, spectral_radius, ReflectionField, ReflectionMatrix};
use crate::scalar::Scalar;
use crate::tol;

/// Outcome of correcting one Euler proposal back into the domain closure.
#[derive(Clone, Debug)]
pub struct StepCorrection<F> {
    pub proposal: Vec<F>,
    pub corrected: Vec<F>,
    /// Scalar local-time increment (sum of per-face increments / ray lengths).
    pub local_time_increment: F,
    /// Reflection-term increment, sum of r * dl contributions.
    pub reflection_increment: Vec<F>,
    /// Per-face local-time increments, for polyhedral domains.
    pub face_increments: Option<Vec<F>>,
    pub iterations: usize,
}

impl<F: Scalar> StepCorrection<F> {
    fn unchanged(y: &[F]) -> Self {
        Self {
            proposal: y.to_vec(),
            corrected: y.to_vec(),
            local_time_increment: F::zero(),
            reflection_increment: vec![F::zero(); y.len()],
            face_increments: None,
            iterations: 0,
        }
    }
}

/// Precomputed polyhedral LCP stepper: columns normalized to n_i . r_i = 1
/// and the contraction precondition rho(I - N R) < 1 verified once.
pub struct PolyhedralStepper<F> {
    /// Normalized reflection columns (length m, each of dimension d).
    columns: Vec<Vec<F>>,
    /// M = N R with the normalized columns: M[i][j] = n_i . r_j.
    m: Mat<F>,
    pub contraction: F,
}

impl<F: Scalar> PolyhedralStepper<F> {
    pub fn new(poly: &Polyhedron<F>, r: &ReflectionMatrix<F>) -> Result<Self, SimError> {
        let d = poly.dim();
        let m = poly.num_faces();
        if r.dim() != d || r.num_faces() != m {
            return Err(SimError::Geometry(GeometryError::DimensionMismatch {
                expected: d,
                got: r.dim(),
            }));
        }
        let mut columns = Vec::with_capacity(m);
        for i in 0..m {
            columns.push(normalize_reflection(&r.column(i), poly.normal(i))?);
        }
        let mut nr = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                nr[(i, j)] = dot(poly.normal(i), &columns[j]);
            }
        }
        let gap = Mat::identity(m).sub_mat(&nr);
        let rho = spectral_radius(&gap)?;
        if !(rho < F::one()) {
            return Err(SimError::ContractionViolated { rho: rho.to_f64_c() });
        }
        Ok(Self { columns, m: nr, contraction: rho })
    }

    pub fn column(&self, i: usize) -> &[F] {
        &self.columns[i]
    }

    /// Solve the one-step LCP: find dL >= 0 with Z = y + R dL feasible and
    /// complementary (dL_i (n_i . Z - b_i) = 0), by projected Gauss-Seidel.
    pub fn step(&self, poly: &Polyhedron<F>, y: &[F]) -> Result<StepCorrection<F>, SimError> {
        let m = poly.num_faces();
        let res_tol = F::tol(tol::LCP_RESIDUAL);
        // Fast path: the proposal is already feasible.
        if (0..m).all(|i| poly.margin(i, y) >= F::zero()) {
            return Ok(StepCorrection::unchanged(y));
        }
        let q: Vec<F> = (0..m).map(|i| poly.margin(i, y)).collect();
        let mut lam = vec![F::zero(); m];
        let mut sweeps = 0usize;
        loop {
            sweeps += 1;
            let mut max_change = F::zero();
            for i in 0..m {
                // margin_i(z) = q_i + (M lam)_i ; diagonal M_ii = 1 after
                // normalization.
                let s = q[i] + dot(self.m.row(i), &lam);
                let new_l = (lam[i] - s).max(F::zero());
                let dl = new_l - lam[i];
                if dl != F::zero() {
                    lam[i] = new_l;
                    max_change = max_change.max(dl.abs());
                }
            }
            // Convergence: feasibility and complementarity residuals.
            if max_change <= res_tol {
                let feas_ok = (0..m).all(|i| q[i] + dot(self.m.row(i), &lam) >= -res_tol);
                let comp: F = (0..m)
                    .map(|i| lam[i] * (q[i] + dot(self.m.row(i), &lam)).max(F::zero()))
                    .sum();
                if feas_ok && comp.abs() <= res_tol {
                    break;
                }
            }
            if sweeps >= tol::LCP_MAX_SWEEPS {
                return Err(SimError::SolverDiverged { sweeps });
            }
        }
        let mut corrected = y.to_vec();
        let mut reflection_increment = vec![F::zero(); y.len()];
        for i in 0..m {
            if lam[i] > F::zero() {
                axpy(&mut corrected, lam[i], &self.columns[i]);
                axpy(&mut reflection_increment, lam[i], &self.columns[i]);
            }
        }
        Ok(StepCorrection {
            proposal: y.to_vec(),
            corrected,
            local_time_increment: lam.iter().copied().sum(),
            reflection_increment,
            face_increments: Some(lam),
            iterations: sweeps,
        })
    }
}

/// One-step polyhedral Skorokhod correction (constructs and validates the
/// stepper; prefer `PolyhedralStepper` when stepping repeatedly).
pub fn skorokhod_step_polyhedron<F: Scalar>(
    poly: &Polyhedron<F>,
    r: &ReflectionMatrix<F>,
    y: &[F],
) -> Result<StepCorrection<F>, SimError> {
    PolyhedralStepper::new(poly, r)?.step(poly, y)
}

/// Smallest t >= 0 with |v + t u| = radius, entering from outside
/// (|v| > radius). None when the ray misses the sphere.
fn ray_sphere_entry<F: Scalar>(v: &[F], u: &[F], radius: F) -> Option<F> {
    let uu = dot(u, u);
    let vu = dot(v, u);
    let c = dot(v, v) - radius * radius;
    let disc = vu * vu - uu * c;
    if disc < F::zero() {
        return None;
    }
    let t = (-vu - disc.sqrt()) / uu;
    (t >= F::zero()).then_some(t)
}

/// Smallest t >= 0 with |v + t u| = radius, exiting from inside
/// (|v| < radius); always exists.
fn ray_sphere_exit<F: Scalar>(v: &[F], u: &[F], radius: F) -> F {
    let uu = dot(u, u);
    let vu = dot(v, u);
    let c = dot(v, v) - radius * radius;
    let disc = (vu * vu - uu * c).max(F::zero());
    (-vu + disc.sqrt()) / uu
}

/// Oblique ray correction for smooth boundaries (balls, half-spaces,
/// ball-complement punctures): push the exterior proposal back along the
/// reflection direction at the nearest boundary point, repeating if the
/// landing point is still outside (at most `RAY_ITER_CAP` times).
pub fn oblique_correction_smooth<F: Scalar>(
    domain: &Domain<F>,
    reflection: &ReflectionField<F>,
    y: &[F],
) -> Result<StepCorrection<F>, SimError> {
    let feas = F::tol(tol::FEASIBILITY);
    let mut z = y.to_vec();
    let mut dl = F::zero();
    let mut dvec = vec![F::zero(); y.len()];
    let mut iters = 0usize;
    loop {
        let phi = domain.signed_distance(&z)?;
        if phi >= -feas * F::half() {
            break;
        }
        iters += 1;
        if iters > tol::RAY_ITER_CAP {
            return Err(SimError::IterationCap { iterations: iters - 1 });
        }
        let bp = domain.nearest_boundary_point(&z)?;
        let r = reflection.eval(&bp)?;
        let t = match domain {
            Domain::HalfSpace { normal, .. } => {
                // r . n = 1 after normalization, so the travel length is -phi.
                let rn = dot(&r, normal);
                -phi / rn
            }
            Domain::Ball { center, radius } => {
                let v = linalg::sub(&z, center);
                ray_sphere_entry(&v, &r, *radius).ok_or(SimError::RayMisses)?
            }
            Domain::PuncturedSpace { excluded, .. } => {
                // The violated component is the (locally unique) one the
                // proposal sits inside.
                let mut t_found = None;
                for comp in excluded {
                    if let Puncture::ClosedBall { center, radius } = comp {
                        let v = linalg::sub(&z, center);
                        if linalg::norm(&v) < *radius {
                            t_found = Some(ray_sphere_exit(&v, &r, *radius));
                            break;
                        }
                    }
                }
                t_found.ok_or(SimError::RayMisses)?
            }
            Domain::Polyhedron(_) | Domain::WholeSpace { .. } => {
                return Err(SimError::UnsupportedDomain)
            }
        };
        axpy(&mut z, t, &r);
        axpy(&mut dvec, t, &r);
        dl = dl + t;
    }
    Ok(StepCorrection {
        proposal: y.to_vec(),
        corrected: z,
        local_time_increment: dl,
        reflection_increment: dvec,
        face_increments: None,
        iterations: iters,
    })
}

/// Discrete Skorokhod map on the half-line: z_k = y_k + l_k with
/// l_k = max(0, max_{j<=k} (-y_j)). Analytic ground truth for the steppers
/// restricted to d = 1.
pub fn skorokhod_map_1d<F: Scalar>(y: &[F]) -> Result<(Vec<F>, Vec<F>), SimError> {
    if y.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    if y[0] < F::zero() {
        return Err(SimError::InvalidInput("skorokhod_map_1d needs y_0 >= 0".into()));
    }
    let mut l = Vec::with_capacity(y.len());
    let mut z = Vec::with_capacity(y.len());
    let mut running = F::zero();
    for &v in y {
        running = running.max(-v);
        l.push(running);
        z.push(v + running);
    }
    Ok((z, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryPoint;

    fn orthant2() -> Polyhedron<f64> {
        Polyhedron::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn lcp_clamp_under_normal_reflection() {
        let p = orthant2();
        let c = skorokhod_step_polyhedron(&p, &ReflectionMatrix::identity(2), &[-1.0, -2.0]).unwrap();
        assert_eq!(c.corrected, vec![0.0, 0.0]);
        assert_eq!(c.face_increments.unwrap(), vec![1.0, 2.0]);
        assert_eq!(c.local_time_increment, 3.0);
    }

    #[test]
    fn lcp_interior_identity() {
        let p = orthant2();
        let c = skorokhod_step_polyhedron(&p, &ReflectionMatrix::identity(2), &[0.5, 0.7]).unwrap();
        assert_eq!(c.corrected, vec![0.5, 0.7]);
        assert_eq!(c.local_time_increment, 0.0);
    }

    #[test]
    fn lcp_oblique_two_face_case() {
        // R = [[1,0],[-0.5,1]], y = (-1, 0.2): both faces active,
        // dL = -R^{-1} y = (1, 0.3), Z = 0 (derived by active-set enumeration).
        let p = orthant2();
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, 0.0], vec![-0.5, 1.0]]));
        let c = skorokhod_step_polyhedron(&p, &r, &[-1.0, 0.2]).unwrap();
        let dl = c.face_increments.unwrap();
        assert!((dl[0] - 1.0).abs() < 1e-10);
        assert!((dl[1] - 0.3).abs() < 1e-10);
        assert!(c.corrected.iter().all(|&v: &f64| v.abs() < 1e-10));
    }

    #[test]
    fn lcp_complementarity_residual() {
        let p = orthant2();
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -0.3], vec![-0.2, 1.0]]));
        let stepper = PolyhedralStepper::new(&p, &r).unwrap();
        let c = stepper.step(&p, &[-0.7, 0.1]).unwrap();
        let dl = c.face_increments.as_ref().unwrap();
        let mut resid = 0.0;
        for i in 0..2 {
            let margin = p.margin(i, &c.corrected);
            assert!(margin >= -1e-10);
            assert!(dl[i] >= 0.0);
            resid += dl[i] * margin.max(0.0);
        }
        assert!(resid <= 1e-10);
    }

    #[test]
    fn contraction_gate() {
        let p = orthant2();
        // Column reflections so strongly coupled that rho(I - R) >= 1.
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -3.0], vec![-3.0, 1.0]]));
        assert!(matches!(
            PolyhedralStepper::new(&p, &r),
            Err(SimError::ContractionViolated { .. })
        ));
    }

    #[test]
    fn ray_halfspace_normal() {
        let d: Domain<f64> = Domain::half_space(vec![1.0, 0.0], 0.0).unwrap();
        let c = oblique_correction_smooth(&d, &ReflectionField::Normal, &[-0.3, 7.0]).unwrap();
        assert!((c.corrected[0] - 0.0).abs() < 1e-14);
        assert!((c.corrected[1] - 7.0).abs() < 1e-14);
        assert!((c.local_time_increment - 0.3).abs() < 1e-14);
    }

    #[test]
    fn ray_halfspace_oblique_drifts_along_boundary() {
        let d: Domain<f64> = Domain::half_space(vec![1.0, 0.0], 0.0).unwrap();
        let c =
            oblique_correction_smooth(&d, &ReflectionField::Constant(vec![1.0, 1.0]), &[-0.3, 7.0])
                .unwrap();
        assert!((c.corrected[0] - 0.0).abs() < 1e-14);
        assert!((c.corrected[1] - 7.3).abs() < 1e-14);
        assert!((c.local_time_increment - 0.3).abs() < 1e-14);
    }

    #[test]
    fn ray_interior_identity() {
        let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let c = oblique_correction_smooth(&d, &ReflectionField::Normal, &[0.2, 0.1]).unwrap();
        assert_eq!(c.corrected, vec![0.2, 0.1]);
        assert_eq!(c.local_time_increment, 0.0);
        assert_eq!(c.iterations, 0);
    }

    #[test]
    fn ray_ball_normal_reflection() {
        let d: Domain<f64> = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let c = oblique_correction_smooth(&d, &ReflectionField::Normal, &[1.2, 0.0]).unwrap();
        assert!((c.corrected[0] - 1.0).abs() < 1e-12);
        assert!((c.local_time_increment - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ray_misses_for_outward_field() {
        let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        // Tangential field: rejected by the normalization, reported as a
        // reflection-field bug.
        let field = ReflectionField::Custom(std::sync::Arc::new(|bp: &BoundaryPoint<f64>| {
            vec![-bp.inward_normal[1], bp.inward_normal[0]]
        }));
        let err = oblique_correction_smooth(&d, &field, &[1.2, 0.0]).unwrap_err();
        assert!(matches!(err, SimError::Model(_)));
    }

    #[test]
    fn skorokhod_map_examples() {
        let (z, l) = skorokhod_map_1d(&[0.5, -0.2, 0.1]).unwrap();
        for (&got, want) in l.iter().zip([0.0f64, 0.2, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (&got, want) in z.iter().zip([0.5f64, 0.0, 0.3]) {
            assert!((got - want).abs() < 1e-15);
        }

        let (z, l) = skorokhod_map_1d(&[0.1, 0.4, 0.2]).unwrap();
        assert_eq!(l, vec![0.0; 3]);
        assert_eq!(z, vec![0.1, 0.4, 0.2]);

        // y = -t on a grid: pure pushing, z stays at 0.
        let y: Vec<f64> = (0..5).map(|k| -(k as f64) * 0.1).collect();
        let (z, l) = skorokhod_map_1d(&y).unwrap();
        for (k, (&zk, &lk)) in z.iter().zip(&l).enumerate() {
            assert!(zk.abs() < 1e-15);
            assert!((lk - (k as f64) * 0.1).abs() < 1e-15);
        }

        assert!(skorokhod_map_1d(&[-0.1]).is_err());
    }
}
