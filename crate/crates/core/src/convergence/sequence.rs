//! Parametric domain and field sequences. Members are either exact domains
//! or analytic signed-distance evaluators (for families outside the shipped
//! domain kinds, like the slit strip).

use std::sync::Arc;

use crate::geometry::{BoundaryPoint, Domain, GeometryError};
use crate::linalg::Mat;
use crate::model::ModelError;
use crate::scalar::Scalar;

#[derive(Clone)]
pub enum SeqDomain<F> {
    Exact(Domain<F>),
    /// Signed distance given in closed form.
    Phi { dim: usize, phi: Arc<dyn Fn(&[F]) -> F + Send + Sync> },
}

impl<F: Scalar> SeqDomain<F> {
    pub fn dim(&self) -> usize {
        match self {
            SeqDomain::Exact(d) => d.dim(),
            SeqDomain::Phi { dim, .. } => *dim,
        }
    }

    pub fn phi(&self, x: &[F]) -> Result<F, GeometryError> {
        match self {
            SeqDomain::Exact(d) => d.signed_distance(x),
            SeqDomain::Phi { dim, phi } => {
                if x.len() != *dim {
                    return Err(GeometryError::DimensionMismatch { expected: *dim, got: x.len() });
                }
                Ok(phi(x))
            }
        }
    }

    pub fn as_exact(&self) -> Option<&Domain<F>> {
        match self {
            SeqDomain::Exact(d) => Some(d),
            SeqDomain::Phi { .. } => None,
        }
    }
}

impl<F> std::fmt::Debug for SeqDomain<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SeqDomain::Exact(_) => f.write_str("Exact"),
            SeqDomain::Phi { .. } => f.write_str("Phi"),
        }
    }
}

type MemberFn<F> = dyn Fn(u32) -> Result<SeqDomain<F>, GeometryError> + Send + Sync;

/// A sequence of domains indexed by n >= 1, together with its declared limit.
#[derive(Clone)]
pub struct DomainSequence<F> {
    dim: usize,
    member: Arc<MemberFn<F>>,
    limit: SeqDomain<F>,
}

impl<F: Scalar> DomainSequence<F> {
    pub fn new(
        dim: usize,
        member: impl Fn(u32) -> Result<SeqDomain<F>, GeometryError> + Send + Sync + 'static,
        limit: SeqDomain<F>,
    ) -> Self {
        assert_eq!(limit.dim(), dim, "limit dimension mismatch");
        Self { dim, member: Arc::new(member), limit }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn member(&self, n: u32) -> Result<SeqDomain<F>, GeometryError> {
        (self.member)(n)
    }

    pub fn limit(&self) -> &SeqDomain<F> {
        &self.limit
    }

    /// The constant sequence D_n = D.
    pub fn constant(domain: Domain<F>) -> Self {
        let dim = domain.dim();
        let d = domain.clone();
        Self::new(dim, move |_| Ok(SeqDomain::Exact(d.clone())), SeqDomain::Exact(domain))
    }

    /// Open balls U(x_n, a_n) with an exact limit domain.
    pub fn ball_family(
        center: impl Fn(u32) -> Vec<F> + Send + Sync + 'static,
        radius: impl Fn(u32) -> F + Send + Sync + 'static,
        limit: Domain<F>,
    ) -> Self {
        let dim = limit.dim();
        Self::new(
            dim,
            move |n| Ok(SeqDomain::Exact(Domain::ball(center(n), radius(n))?)),
            SeqDomain::Exact(limit),
        )
    }

    /// Balls U(center, n) expanding to the whole space.
    pub fn expanding_balls(center: Vec<F>) -> Self {
        let dim = center.len();
        Self::new(
            dim,
            move |n| Ok(SeqDomain::Exact(Domain::ball(center.clone(), F::from_f64_c(n as f64))?)),
            SeqDomain::Exact(Domain::whole_space(dim)),
        )
    }

    /// Polyhedra with index-dependent face normals and offsets.
    pub fn polyhedron_family(
        faces: impl Fn(u32) -> (Vec<Vec<F>>, Vec<F>) + Send + Sync + 'static,
        limit: Domain<F>,
    ) -> Self {
        let dim = limit.dim();
        Self::new(
            dim,
            move |n| {
                let (normals, offsets) = faces(n);
                Ok(SeqDomain::Exact(Domain::polyhedron(normals, offsets)?))
            },
            SeqDomain::Exact(limit),
        )
    }

    /// Upper half-plane with a thin slit block removed:
    /// D_n = interior of (R x R_+ minus [2^{-n-1}, 2^{-n}] x [0, 1]),
    /// converging to the open upper half-plane in the Wijsman sense but not
    /// weakly.
    pub fn slit_strip() -> Self {
        let limit = Domain::half_space(vec![F::zero(), F::one()], F::zero())
            .expect("unit normal");
        Self::new(
            2,
            |n| {
                let l = F::from_f64_c(2f64.powi(-(n as i32) - 1));
                let r = F::from_f64_c(2f64.powi(-(n as i32)));
                Ok(SeqDomain::Phi {
                    dim: 2,
                    phi: Arc::new(move |x: &[F]| slit_phi(l, r, x[0], x[1])),
                })
            },
            SeqDomain::Exact(limit),
        )
    }
}

impl<F> std::fmt::Debug for DomainSequence<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DomainSequence").field("dim", &self.dim).finish()
    }
}

/// Signed distance to the boundary of the slit domain
/// (R x R_+) minus [l, r] x [0, 1]. The gap (l, r) x {0} of the axis is not
/// part of the boundary (it is not approachable from the domain), and
/// neither is the block's open bottom edge.
fn slit_phi<F: Scalar>(l: F, r: F, x1: F, x2: F) -> F {
    let one = F::one();
    let zero = F::zero();
    if x2 <= zero {
        if x1 <= l || x1 >= r {
            return x2; // distance straight up to the axis rays
        }
        let dl = (x1 - l).hypot(x2);
        let dr = (r - x1).hypot(x2);
        return -dl.min(dr);
    }
    // Box distance to the block [l, r] x [0, 1].
    let dx = (l - x1).max(zero).max(x1 - r);
    let dy = (x2 - one).max(zero); // x2 > 0 here
    let block = dx.hypot(dy);
    if block > zero {
        x2.min(block)
    } else if x2 >= one {
        // On the top edge (dy = 0 and inside the x-range): boundary.
        zero
    } else {
        // Inside (or on the sides of) the block: the bottom edge is not
        // boundary, so only sides and top count.
        -(x1 - l).min(r - x1).min(one - x2)
    }
}

/// Which field a [`FieldSequence`] carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Drift,
    Covariance,
    Reflection,
}

#[derive(Clone)]
pub enum FieldEval<F> {
    Vector(Arc<dyn Fn(&[F]) -> Vec<F> + Send + Sync>),
    Matrix(Arc<dyn Fn(&[F]) -> Mat<F> + Send + Sync>),
    /// Reflection fields live on the boundary and see the local normal.
    Reflection(Arc<dyn Fn(&BoundaryPoint<F>) -> Result<Vec<F>, ModelError> + Send + Sync>),
}

type FieldMemberFn<F> = dyn Fn(u32) -> FieldEval<F> + Send + Sync;

/// A sequence of coefficient fields f_n on the members of a domain sequence,
/// with its limit field on the limit domain.
#[derive(Clone)]
pub struct FieldSequence<F> {
    pub kind: FieldKind,
    member: Arc<FieldMemberFn<F>>,
    limit: FieldEval<F>,
}

impl<F: Scalar> FieldSequence<F> {
    pub fn new(
        kind: FieldKind,
        member: impl Fn(u32) -> FieldEval<F> + Send + Sync + 'static,
        limit: FieldEval<F>,
    ) -> Self {
        Self { kind, member: Arc::new(member), limit }
    }

    pub fn member(&self, n: u32) -> FieldEval<F> {
        (self.member)(n)
    }

    pub fn limit(&self) -> &FieldEval<F> {
        &self.limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slit_phi_regions() {
        let l = 0.25f64;
        let r = 0.5f64;
        // Deep in the domain, far from the block: distance to the axis.
        assert!((slit_phi(l, r, -3.0, 2.0) - 2.0).abs() < 1e-15);
        // The paper's probe (0, 1): distance to the block corner (l, 1).
        assert!((slit_phi(l, r, 0.0, 1.0) - 0.25).abs() < 1e-15);
        // Below the axis under the gap: nearest boundary is a gap endpoint.
        let want = (0.1f64).hypot(0.05);
        assert!((slit_phi(l, r, l + 0.1, -0.05) + want).abs() < 1e-15);
        // Below the axis outside the gap.
        assert!((slit_phi(l, r, -1.0, -0.3) + 0.3).abs() < 1e-15);
        // Inside the block: sides and top only.
        assert!((slit_phi(l, r, 0.3, 0.01) + 0.05).abs() < 1e-15);
        // On the block's left side: boundary.
        assert!(slit_phi(l, r, l, 0.5).abs() < 1e-15);
    }

    #[test]
    fn slit_member_at_probe() {
        let seq: DomainSequence<f64> = DomainSequence::slit_strip();
        let x0 = [0.0, 1.0];
        for n in 1..=6 {
            let phi_n = seq.member(n).unwrap().phi(&x0).unwrap();
            let bound = 2f64.powi(-(n as i32) - 1);
            assert!((phi_n - bound).abs() < 1e-15, "phi_{n} = {phi_n}");
        }
        assert_eq!(seq.limit().phi(&x0).unwrap(), 1.0);
    }

    #[test]
    fn ball_family_members() {
        let seq: DomainSequence<f64> = DomainSequence::ball_family(
            |_| vec![0.0, 0.0],
            |n| 1.0 + 1.0 / n as f64,
            Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
        );
        let m2 = seq.member(2).unwrap();
        assert!((m2.phi(&[0.0, 0.0]).unwrap() - 1.5).abs() < 1e-15);
    }
}
