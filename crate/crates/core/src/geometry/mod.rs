//! Exact geometry for the supported domain classes: membership, signed
//! distance, nearest boundary points with inward normals, and distance to the
//! exceptional (non-smooth) boundary set V.
//!
//! Sign convention: phi(x) > 0 strictly inside, < 0 outside the closure,
//! = 0 on the boundary. The whole space carries phi = +inf.

mod polyhedron;
mod region;
pub mod sample;

pub use polyhedron::{Polyhedron, Projection};
pub use region::{ProbeSet, Region};

use crate::linalg::{self, dot, norm};
use crate::scalar::Scalar;
use crate::tol;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("face {index} normal has norm {norm}, not unit")]
    NotUnitNormal { index: usize, norm: f64 },
    #[error("face list empty or ragged")]
    InvalidFaceList,
    #[error("polyhedron has empty interior")]
    EmptyPolyhedron,
    #[error("face {index} is redundant")]
    RedundantFace { index: usize },
    #[error("ball radius must be positive")]
    NonPositiveRadius,
    #[error("projection is ambiguous: point is equidistant from several boundary pieces")]
    AmbiguousProjection,
    #[error("nearest boundary point undefined at the ball center")]
    CenterSingular,
    #[error("domain has no boundary")]
    NoBoundary,
    #[error("punctured component {index} must be an affine subspace of dimension <= d-2")]
    PunctureDimension { index: usize },
    #[error("punctured space requires dimension >= 2")]
    PunctureAmbientDimension,
    #[error("operation needs a bounding region for an unbounded domain")]
    UnboundedWithoutBox,
    #[error("sampling is not supported in dimension {dim}")]
    UnsupportedDimension { dim: usize },
}

/// One removed component of a punctured space.
#[derive(Clone, Debug)]
pub enum Puncture<F> {
    /// Affine subspace {base + span(basis)}; `basis` must be orthonormal and
    /// have at most d-2 vectors. An empty basis is a single point.
    Affine { base: Vec<F>, basis: Vec<Vec<F>> },
    /// A removed closed ball; its sphere is a smooth reflecting boundary.
    ClosedBall { center: Vec<F>, radius: F },
}

/// Geometric state space of a reflected diffusion.
#[derive(Clone, Debug)]
pub enum Domain<F> {
    Polyhedron(Polyhedron<F>),
    Ball { center: Vec<F>, radius: F },
    HalfSpace { normal: Vec<F>, offset: F },
    WholeSpace { dim: usize },
    PuncturedSpace { dim: usize, excluded: Vec<Puncture<F>> },
}

/// A boundary point together with the inward unit normal there, and the
/// active face for polyhedra.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint<F> {
    pub point: Vec<F>,
    pub inward_normal: Vec<F>,
    pub face: Option<usize>,
}

impl<F: Scalar> Domain<F> {
    pub fn polyhedron(normals: Vec<Vec<F>>, offsets: Vec<F>) -> Result<Self, GeometryError> {
        Ok(Domain::Polyhedron(Polyhedron::new(normals, offsets)?))
    }

    /// The nonnegative orthant (0, inf)^d.
    pub fn orthant(dim: usize) -> Self {
        let normals = (0..dim)
            .map(|i| {
                let mut n = vec![F::zero(); dim];
                n[i] = F::one();
                n
            })
            .collect();
        Domain::Polyhedron(Polyhedron::new(normals, vec![F::zero(); dim]).expect("orthant is valid"))
    }

    pub fn ball(center: Vec<F>, radius: F) -> Result<Self, GeometryError> {
        if !(radius > F::zero()) {
            return Err(GeometryError::NonPositiveRadius);
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn half_space(normal: Vec<F>, offset: F) -> Result<Self, GeometryError> {
        let nn = norm(&normal);
        if (nn - F::one()).abs() > F::tol(tol::UNIT_NORM) {
            return Err(GeometryError::NotUnitNormal { index: 0, norm: nn.to_f64_c() });
        }
        Ok(Domain::HalfSpace { normal, offset })
    }

    pub fn whole_space(dim: usize) -> Self {
        Domain::WholeSpace { dim }
    }

    pub fn punctured(dim: usize, excluded: Vec<Puncture<F>>) -> Result<Self, GeometryError> {
        if dim < 2 {
            return Err(GeometryError::PunctureAmbientDimension);
        }
        for (k, c) in excluded.iter().enumerate() {
            match c {
                Puncture::Affine { base, basis } => {
                    if base.len() != dim || basis.len() + 2 > dim {
                        return Err(GeometryError::PunctureDimension { index: k });
                    }
                    for (a, u) in basis.iter().enumerate() {
                        if u.len() != dim {
                            return Err(GeometryError::PunctureDimension { index: k });
                        }
                        if (norm(u) - F::one()).abs() > F::tol(tol::UNIT_NORM) {
                            return Err(GeometryError::NotUnitNormal { index: a, norm: norm(u).to_f64_c() });
                        }
                        for v in &basis[..a] {
                            if dot(u, v).abs() > F::tol(tol::UNIT_NORM) {
                                return Err(GeometryError::PunctureDimension { index: k });
                            }
                        }
                    }
                }
                Puncture::ClosedBall { center, radius } => {
                    if center.len() != dim {
                        return Err(GeometryError::DimensionMismatch { expected: dim, got: center.len() });
                    }
                    if !(*radius > F::zero()) {
                        return Err(GeometryError::NonPositiveRadius);
                    }
                }
            }
        }
        Ok(Domain::PuncturedSpace { dim, excluded })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Polyhedron(p) => p.dim(),
            Domain::Ball { center, .. } => center.len(),
            Domain::HalfSpace { normal, .. } => normal.len(),
            Domain::WholeSpace { dim } => *dim,
            Domain::PuncturedSpace { dim, .. } => *dim,
        }
    }

    fn check_dim(&self, x: &[F]) -> Result<(), GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Signed distance to the boundary: positive inside, negative outside the
    /// closure, +inf for the whole space.
    pub fn signed_distance(&self, x: &[F]) -> Result<F, GeometryError> {
        self.check_dim(x)?;
        Ok(match self {
            Domain::Polyhedron(p) => {
                let (_, mmin) = p.min_margin(x);
                if mmin >= F::zero() {
                    // Interior formula: with unit normals, the foot of the
                    // minimizing perpendicular stays in the closure, so the
                    // hyperplane distance is the boundary distance.
                    mmin
                } else {
                    -p.project_to_closure(x).distance
                }
            }
            Domain::Ball { center, radius } => *radius - linalg::distance(x, center),
            Domain::HalfSpace { normal, offset } => dot(normal, x) - *offset,
            Domain::WholeSpace { .. } => F::infinity(),
            Domain::PuncturedSpace { excluded, .. } => {
                let mut phi = F::infinity();
                for c in excluded {
                    let s = match c {
                        Puncture::Affine { base, basis } => affine_distance(base, basis, x),
                        Puncture::ClosedBall { center, radius } => linalg::distance(x, center) - *radius,
                    };
                    phi = phi.min(s);
                }
                phi
            }
        })
    }

    /// Membership in the open domain.
    pub fn contains(&self, x: &[F]) -> Result<bool, GeometryError> {
        Ok(self.signed_distance(x)? > F::zero())
    }

    /// The unique nearest boundary point zeta(x) with its inward unit normal.
    /// Fails with `AmbiguousProjection` when two boundary pieces tie within
    /// 1e-10 (the query point is near the exceptional set).
    pub fn nearest_boundary_point(&self, x: &[F]) -> Result<BoundaryPoint<F>, GeometryError> {
        self.check_dim(x)?;
        let tie = F::tol(tol::TIE);
        match self {
            Domain::Polyhedron(p) => {
                let (imin, mmin) = p.min_margin(x);
                if mmin >= F::zero() {
                    let ties = (0..p.num_faces())
                        .filter(|&i| (p.margin(i, x) - mmin).abs() <= tie)
                        .count();
                    if ties > 1 {
                        return Err(GeometryError::AmbiguousProjection);
                    }
                    let mut point = x.to_vec();
                    linalg::axpy(&mut point, -mmin, p.normal(imin));
                    Ok(BoundaryPoint { point, inward_normal: p.normal(imin).to_vec(), face: Some(imin) })
                } else {
                    let proj = p.project_to_closure(x);
                    if proj.active.len() != 1 {
                        return Err(GeometryError::AmbiguousProjection);
                    }
                    let face = proj.active[0];
                    Ok(BoundaryPoint {
                        point: proj.point,
                        inward_normal: p.normal(face).to_vec(),
                        face: Some(face),
                    })
                }
            }
            Domain::Ball { center, radius } => {
                let r = linalg::distance(x, center);
                if r <= F::tol(tol::TIE) {
                    return Err(GeometryError::CenterSingular);
                }
                let dir: Vec<F> = x.iter().zip(center).map(|(&a, &c)| (a - c) / r).collect();
                let point: Vec<F> = center.iter().zip(&dir).map(|(&c, &u)| c + u * *radius).collect();
                let inward_normal = dir.iter().map(|&u| -u).collect();
                Ok(BoundaryPoint { point, inward_normal, face: None })
            }
            Domain::HalfSpace { normal, offset } => {
                let m = dot(normal, x) - *offset;
                let mut point = x.to_vec();
                linalg::axpy(&mut point, -m, normal);
                Ok(BoundaryPoint { point, inward_normal: normal.clone(), face: None })
            }
            Domain::WholeSpace { .. } => Err(GeometryError::NoBoundary),
            Domain::PuncturedSpace { excluded, .. } => {
                if excluded.is_empty() {
                    return Err(GeometryError::NoBoundary);
                }
                let mut dists: Vec<F> = Vec::with_capacity(excluded.len());
                for c in excluded {
                    dists.push(match c {
                        Puncture::Affine { base, basis } => affine_distance(base, basis, x),
                        Puncture::ClosedBall { center, radius } => (linalg::distance(x, center) - *radius).abs(),
                    });
                }
                let (kmin, dmin) = dists
                    .iter()
                    .enumerate()
                    .fold((0, F::infinity()), |acc, (k, &d)| if d < acc.1 { (k, d) } else { acc });
                if dists.iter().enumerate().filter(|(k, &d)| *k != kmin && (d - dmin).abs() <= tie).count() > 0 {
                    return Err(GeometryError::AmbiguousProjection);
                }
                match &excluded[kmin] {
                    Puncture::Affine { base, basis } => {
                        let point = affine_project(base, basis, x);
                        let d = linalg::distance(x, &point);
                        if d <= tie {
                            // On the component itself: no distinguished normal.
                            return Err(GeometryError::AmbiguousProjection);
                        }
                        let inward_normal = x.iter().zip(&point).map(|(&a, &p)| (a - p) / d).collect();
                        Ok(BoundaryPoint { point, inward_normal, face: None })
                    }
                    Puncture::ClosedBall { center, radius } => {
                        let r = linalg::distance(x, center);
                        if r <= tie {
                            return Err(GeometryError::CenterSingular);
                        }
                        let dir: Vec<F> = x.iter().zip(center).map(|(&a, &c)| (a - c) / r).collect();
                        let point: Vec<F> =
                            center.iter().zip(&dir).map(|(&c, &u)| c + u * *radius).collect();
                        // Inward into the domain = away from the removed ball.
                        Ok(BoundaryPoint { point, inward_normal: dir, face: None })
                    }
                }
            }
        }
    }

    /// Distance to the exceptional set V (non-smooth boundary parts); +inf
    /// when V is empty (balls, half-spaces, the whole space).
    pub fn exceptional_set_distance(&self, x: &[F]) -> Result<F, GeometryError> {
        self.check_dim(x)?;
        Ok(match self {
            Domain::Polyhedron(p) => p.exceptional_distance(x),
            Domain::PuncturedSpace { excluded, .. } => {
                let mut best = F::infinity();
                for c in excluded {
                    if let Puncture::Affine { base, basis } = c {
                        best = best.min(affine_distance(base, basis, x));
                    }
                }
                best
            }
            _ => F::infinity(),
        })
    }

    /// Euclidean projection onto the domain closure (identity inside).
    pub fn project_to_closure(&self, x: &[F]) -> Result<Vec<F>, GeometryError> {
        self.check_dim(x)?;
        if self.signed_distance(x)? >= F::zero() {
            return Ok(x.to_vec());
        }
        Ok(match self {
            Domain::Polyhedron(p) => p.project_to_closure(x).point,
            Domain::Ball { center, radius } => {
                let r = linalg::distance(x, center);
                center
                    .iter()
                    .zip(x)
                    .map(|(&c, &a)| c + (a - c) * (*radius / r))
                    .collect()
            }
            Domain::HalfSpace { normal, offset } => {
                let m = dot(normal, x) - *offset;
                let mut p = x.to_vec();
                linalg::axpy(&mut p, -m, normal);
                p
            }
            Domain::WholeSpace { .. } => unreachable!("whole space has phi = +inf"),
            Domain::PuncturedSpace { excluded, .. } => {
                // Negative phi only happens strictly inside a removed ball.
                let mut out = x.to_vec();
                for c in excluded {
                    if let Puncture::ClosedBall { center, radius } = c {
                        let r = linalg::distance(x, center);
                        if r < *radius {
                            if r <= F::tol(tol::TIE) {
                                // Removed-ball centre: every sphere point is
                                // nearest; pick the first axis direction.
                                out = center.clone();
                                out[0] = out[0] + *radius;
                            } else {
                                out = center
                                    .iter()
                                    .zip(x)
                                    .map(|(&c0, &a)| c0 + (a - c0) * (*radius / r))
                                    .collect();
                            }
                            break;
                        }
                    }
                }
                out
            }
        })
    }

    /// The polyhedron payload when this is one.
    pub fn as_polyhedron(&self) -> Option<&Polyhedron<F>> {
        match self {
            Domain::Polyhedron(p) => Some(p),
            _ => None,
        }
    }
}

fn affine_project<F: Scalar>(base: &[F], basis: &[Vec<F>], x: &[F]) -> Vec<F> {
    let mut p = base.to_vec();
    let rel = linalg::sub(x, base);
    for u in basis {
        linalg::axpy(&mut p, dot(&rel, u), u);
    }
    p
}

fn affine_distance<F: Scalar>(base: &[F], basis: &[Vec<F>], x: &[F]) -> F {
    linalg::distance(x, &affine_project(base, basis, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_signed_distance_example() {
        // Example: ball of radius 2 centred at (3,0), probed at the origin.
        let d: Domain<f64> = Domain::ball(vec![3.0, 0.0], 2.0).unwrap();
        assert!((d.signed_distance(&[0.0, 0.0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthant_signed_distance() {
        let d: Domain<f64> = Domain::orthant(2);
        assert_eq!(d.signed_distance(&[1.0, 2.0]).unwrap(), 1.0);
        assert!((d.signed_distance(&[-3.0, -4.0]).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn whole_space_sentinel() {
        let d: Domain<f64> = Domain::whole_space(3);
        assert!(d.signed_distance(&[0.0, 0.0, 0.0]).unwrap().is_infinite());
        assert!(matches!(d.nearest_boundary_point(&[0.0; 3]), Err(GeometryError::NoBoundary)));
    }

    #[test]
    fn nearest_boundary_orthant() {
        let d = Domain::orthant(2);
        let b = d.nearest_boundary_point(&[1.0, 2.0]).unwrap();
        assert_eq!(b.point, vec![0.0, 2.0]);
        assert_eq!(b.inward_normal, vec![1.0, 0.0]);
        assert_eq!(b.face, Some(0));
    }

    #[test]
    fn nearest_boundary_ball() {
        let d = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b = d.nearest_boundary_point(&[0.5, 0.0]).unwrap();
        assert_eq!(b.point, vec![1.0, 0.0]);
        assert_eq!(b.inward_normal, vec![-1.0, 0.0]);
        assert_eq!(b.face, None);
        assert!(matches!(
            d.nearest_boundary_point(&[0.0, 0.0]),
            Err(GeometryError::CenterSingular)
        ));
    }

    #[test]
    fn nearest_boundary_tie_is_ambiguous() {
        let d = Domain::orthant(2);
        assert!(matches!(
            d.nearest_boundary_point(&[1.0, 1.0]),
            Err(GeometryError::AmbiguousProjection)
        ));
        // Exterior diagonal point projects onto the corner: also ambiguous.
        assert!(matches!(
            d.nearest_boundary_point(&[-1.0, -1.0]),
            Err(GeometryError::AmbiguousProjection)
        ));
    }

    #[test]
    fn exceptional_distance_examples() {
        let d2: Domain<f64> = Domain::orthant(2);
        assert!((d2.exceptional_set_distance(&[1.0, 2.0]).unwrap() - 5.0f64.sqrt()).abs() < 1e-12);
        // d = 3: nearest edge {x1 = x2 = 0} at distance sqrt(2).
        let d3: Domain<f64> = Domain::orthant(3);
        assert!(
            (d3.exceptional_set_distance(&[1.0, 1.0, 5.0]).unwrap() - 2.0f64.sqrt()).abs() < 1e-12
        );
        let ball: Domain<f64> = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(ball.exceptional_set_distance(&[0.3, 0.4]).unwrap().is_infinite());
    }

    #[test]
    fn punctured_space_geometry() {
        // R^2 minus the origin.
        let d: Domain<f64> = Domain::punctured(2, vec![Puncture::Affine { base: vec![0.0, 0.0], basis: vec![] }]).unwrap();
        assert!((d.signed_distance(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        assert!((d.exceptional_set_distance(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-15);
        // R^2 minus a closed ball: smooth boundary, V empty.
        let c: Domain<f64> = Domain::punctured(
            2,
            vec![Puncture::ClosedBall { center: vec![0.0, 0.0], radius: 0.5 }],
        )
        .unwrap();
        assert!((c.signed_distance(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!((c.signed_distance(&[0.25, 0.0]).unwrap() + 0.25).abs() < 1e-15);
        assert!(c.exceptional_set_distance(&[1.0, 0.0]).unwrap().is_infinite());
        let b = c.nearest_boundary_point(&[1.0, 0.0]).unwrap();
        assert_eq!(b.point, vec![0.5, 0.0]);
        assert_eq!(b.inward_normal, vec![1.0, 0.0]);
    }

    #[test]
    fn punctured_rejects_bad_components() {
        // codim 1 component in d = 2.
        let err = Domain::punctured(
            2,
            vec![Puncture::Affine { base: vec![0.0, 0.0], basis: vec![vec![1.0, 0.0]] }],
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::PunctureDimension { .. }));
        assert!(Domain::<f64>::punctured(1, vec![]).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let d = Domain::orthant(2);
        assert!(matches!(
            d.signed_distance(&[1.0, 2.0, 3.0]),
            Err(GeometryError::DimensionMismatch { .. })
        ));
    }
}
