//! Convex polyhedra in H-representation with unit face normals, and the
//! active-set projection machinery behind exterior signed distances,
//! exceptional-set distances and construction-time feasibility checks.
//!
//! All enumeration is brute force over face subsets; m is small at desk scale
//! so the 2^m cost is negligible against exactness.

use crate::linalg::{self, dot, Mat};
use crate::scalar::Scalar;
use crate::tol;

use super::GeometryError;

#[derive(Clone, Debug)]
pub struct Polyhedron<F> {
    normals: Vec<Vec<F>>,
    offsets: Vec<F>,
}

/// Result of projecting a point onto a polyhedral set.
#[derive(Clone, Debug)]
pub struct Projection<F> {
    pub point: Vec<F>,
    pub distance: F,
    /// Faces whose equality holds at the projected point within the tie
    /// tolerance (includes any forced ones).
    pub active: Vec<usize>,
}

impl<F: Scalar> Polyhedron<F> {
    /// Build D = {x : x .  n_i > b_i for all i}. Rejects non-unit normals,
    /// empty interiors and redundant faces (faces whose relatively open
    /// equality set is empty).
    pub fn new(normals: Vec<Vec<F>>, offsets: Vec<F>) -> Result<Self, GeometryError> {
        if normals.is_empty() || normals.len() != offsets.len() {
            return Err(GeometryError::InvalidFaceList);
        }
        let dim = normals[0].len();
        if dim == 0 {
            return Err(GeometryError::InvalidFaceList);
        }
        let unit_tol = F::tol(tol::UNIT_NORM);
        for (i, n) in normals.iter().enumerate() {
            if n.len() != dim {
                return Err(GeometryError::DimensionMismatch { expected: dim, got: n.len() });
            }
            let nn = linalg::norm(n);
            if (nn - F::one()).abs() > unit_tol {
                return Err(GeometryError::NotUnitNormal { index: i, norm: nn.to_f64_c() });
            }
        }
        let poly = Self { normals, offsets };
        let scale = poly
            .offsets
            .iter()
            .fold(F::one(), |a, &b| a.max(b.abs()));
        // Interior nonempty: some uniform margin t > 0 must be feasible.
        let anchor = vec![F::zero(); dim];
        let mut interior = None;
        let mut t = scale;
        for _ in 0..80 {
            if let Some(p) = poly.project(&anchor, &[], t) {
                interior = Some(p.point);
                break;
            }
            t = t * F::half();
        }
        let interior = interior.ok_or(GeometryError::EmptyPolyhedron)?;
        // Non-redundancy: each face's equality set must be feasible with the
        // remaining constraints held at some positive margin.
        for j in 0..poly.normals.len() {
            let mut t = scale;
            let mut ok = false;
            for _ in 0..80 {
                if poly.project(&interior, &[j], t).is_some() {
                    ok = true;
                    break;
                }
                t = t * F::half();
            }
            if !ok {
                return Err(GeometryError::RedundantFace { index: j });
            }
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn num_faces(&self) -> usize {
        self.normals.len()
    }

    pub fn normal(&self, i: usize) -> &[F] {
        &self.normals[i]
    }

    pub fn offset(&self, i: usize) -> F {
        self.offsets[i]
    }

    pub fn margin(&self, i: usize, x: &[F]) -> F {
        dot(&self.normals[i], x) - self.offsets[i]
    }

    /// min_i (n_i . x - b_i); nonnegative exactly on the closure.
    pub fn min_margin(&self, x: &[F]) -> (usize, F) {
        let mut best = (0usize, self.margin(0, x));
        for i in 1..self.normals.len() {
            let m = self.margin(i, x);
            if m < best.1 {
                best = (i, m);
            }
        }
        best
    }

    /// Project `y` onto {x : n_i . x = b_i (i in forced), n_i . x >= b_i + margin (others)}
    /// by enumerating active subsets. Returns `None` when the set is empty.
    ///
    /// Soundness: the Euclidean projection onto a nonempty closed polyhedron
    /// satisfies x* - y in span of the active normals, so projecting onto the
    /// affine hull of a full-rank subset of the true active set recovers x*;
    /// scanning all full-rank subsets and keeping the nearest feasible
    /// candidate therefore finds it.
    pub fn project(&self, y: &[F], forced: &[usize], margin: F) -> Option<Projection<F>> {
        let m = self.normals.len();
        let d = self.dim();
        let slack = F::tol(1e-10) * (F::one() + linalg::norm(y) + margin.abs());
        let free: Vec<usize> = (0..m).filter(|i| !forced.contains(i)).collect();
        let max_extra = d.saturating_sub(forced.len());
        let mut best: Option<(Vec<F>, F)> = None;
        self.enumerate_subsets(&free, max_extra, &mut Vec::new(), &mut |chosen| {
            let mut active: Vec<usize> = forced.to_vec();
            active.extend(chosen.iter().copied());
            if let Some(p) = self.project_affine(y, &active, margin, forced) {
                let ok = forced.iter().all(|&i| self.margin(i, &p).abs() <= slack)
                    && free.iter().all(|&i| self.margin(i, &p) >= margin - slack);
                if ok {
                    let dist = linalg::distance(&p, y);
                    if best.as_ref().map_or(true, |(_, bd)| dist < *bd) {
                        best = Some((p, dist));
                    }
                }
            }
        });
        best.map(|(point, distance)| {
            let tie = F::tol(tol::TIE);
            let active = (0..m).filter(|&i| self.margin(i, &point).abs() <= tie).collect();
            Projection { point, distance, active }
        })
    }

    fn enumerate_subsets(
        &self,
        free: &[usize],
        max_len: usize,
        prefix: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        visit(prefix);
        if prefix.len() == max_len {
            return;
        }
        let start = prefix
            .last()
            .map(|&last| free.iter().position(|&f| f == last).unwrap() + 1)
            .unwrap_or(0);
        for k in start..free.len() {
            prefix.push(free[k]);
            self.enumerate_subsets(free, max_len, prefix, visit);
            prefix.pop();
        }
    }

    /// Project `y` onto the affine set where the listed faces hold with
    /// equality (forced ones at b_i, the rest at b_i + margin). `None` when
    /// the normals are linearly dependent.
    fn project_affine(&self, y: &[F], active: &[usize], margin: F, forced: &[usize]) -> Option<Vec<F>> {
        if active.is_empty() {
            return Some(y.to_vec());
        }
        let k = active.len();
        let mut gram = Mat::zeros(k, k);
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                gram[(a, b)] = dot(&self.normals[i], &self.normals[j]);
            }
        }
        let rhs: Vec<F> = active
            .iter()
            .map(|&i| {
                let target = if forced.contains(&i) { self.offsets[i] } else { self.offsets[i] + margin };
                target - dot(&self.normals[i], y)
            })
            .collect();
        let lam = linalg::solve(&gram, &rhs, F::tol(1e-10))?;
        let mut p = y.to_vec();
        for (a, &i) in active.iter().enumerate() {
            linalg::axpy(&mut p, lam[a], &self.normals[i]);
        }
        Some(p)
    }

    /// Euclidean projection onto the closure; the polyhedron is nonempty by
    /// construction so this always succeeds.
    pub fn project_to_closure(&self, y: &[F]) -> Projection<F> {
        self.project(y, &[], F::zero())
            .expect("validated polyhedron is nonempty")
    }

    /// Distance from x to the edge set V = union of pairwise face
    /// intersections; +inf when V is empty.
    pub fn exceptional_distance(&self, x: &[F]) -> F {
        let m = self.normals.len();
        let mut best = F::infinity();
        for i in 0..m {
            for j in (i + 1)..m {
                if let Some(p) = self.project(x, &[i, j], F::zero()) {
                    best = best.min(p.distance);
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthant2() -> Polyhedron<f64> {
        Polyhedron::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_non_unit_normal() {
        let err = Polyhedron::new(vec![vec![2.0, 0.0]], vec![0.0]).unwrap_err();
        assert!(matches!(err, GeometryError::NotUnitNormal { .. }));
    }

    #[test]
    fn rejects_empty() {
        let err = Polyhedron::new(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0]],
            vec![1.0, 1.0], // x1 > 1 and x1 < -1
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::EmptyPolyhedron));
    }

    #[test]
    fn rejects_redundant_face() {
        let s = 0.5f64.sqrt();
        // x1 > 0, x2 > 0 already imply (x1 + x2)/sqrt(2) > -1.
        let err = Polyhedron::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]],
            vec![0.0, 0.0, -1.0],
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::RedundantFace { index: 2 }));
    }

    #[test]
    fn accepts_slab() {
        let p = Polyhedron::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0.0, -1.0]).unwrap();
        assert_eq!(p.num_faces(), 2);
    }

    #[test]
    fn exterior_projection_orthant() {
        let p = orthant2();
        let proj = p.project_to_closure(&[-3.0, -4.0]);
        assert!((proj.distance - 5.0).abs() < 1e-12);
        assert!(proj.point.iter().all(|&c: &f64| c.abs() < 1e-12));
        assert_eq!(proj.active, vec![0, 1]);
    }

    #[test]
    fn exterior_projection_onto_face() {
        let p = orthant2();
        let proj = p.project_to_closure(&[-2.0, 5.0]);
        assert!((proj.distance - 2.0).abs() < 1e-12);
        assert!((proj.point[1] - 5.0).abs() < 1e-12);
        assert_eq!(proj.active, vec![0]);
    }

    #[test]
    fn exceptional_distance_orthant() {
        let p = orthant2();
        let d = p.exceptional_distance(&[1.0, 2.0]);
        assert!((d - 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exceptional_distance_halfplane_is_infinite() {
        let p: Polyhedron<f64> = Polyhedron::new(vec![vec![1.0, 0.0]], vec![0.0]).unwrap();
        assert!(p.exceptional_distance(&[1.0, 1.0]).is_infinite());
    }
}
