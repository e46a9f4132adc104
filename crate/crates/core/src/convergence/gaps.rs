//! Gap diagnostics over probe grids.

use super::sequence::{DomainSequence, FieldEval, FieldKind, FieldSequence, SeqDomain};
use super::ConvergenceError;
use crate::geometry::{sample, Domain, GeometryError, ProbeSet, Region};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol;

fn to_f64_point<F: Scalar>(x: &[F]) -> Vec<f64> {
    x.iter().map(|&v| v.to_f64_c()).collect()
}

/// sup over probes of |phi_n - phi_0|, with both signed distances clamped at
/// `saturation` so that a whole-space limit (phi = +inf) reads as "phi_n must
/// exceed the threshold everywhere".
pub fn weak_convergence_gap_saturated<F: Scalar>(
    seq: &DomainSequence<F>,
    n: u32,
    probes: &ProbeSet<F>,
    saturation: F,
) -> Result<F, ConvergenceError> {
    let member = seq.member(n)?;
    let limit = seq.limit();
    let mut gap = F::zero();
    for x in probes.points() {
        let a = member.phi(&x)?.min(saturation);
        let b = limit.phi(&x)?.min(saturation);
        gap = gap.max((a - b).abs());
    }
    Ok(gap)
}

/// [`weak_convergence_gap_saturated`] at the default saturation threshold.
pub fn weak_convergence_gap<F: Scalar>(
    seq: &DomainSequence<F>,
    n: u32,
    probes: &ProbeSet<F>,
) -> Result<F, ConvergenceError> {
    weak_convergence_gap_saturated(seq, n, probes, F::from_f64_c(tol::SATURATION_DEFAULT))
}

/// Which set the Wijsman distance gap targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WijsmanTarget {
    Boundary,
    Domain,
    Complement,
}

fn target_distance<F: Scalar>(target: WijsmanTarget, phi: F) -> F {
    match target {
        WijsmanTarget::Boundary => phi.abs(),
        // dist(x, closure D) = phi_-, dist(x, D^c) = phi_+.
        WijsmanTarget::Domain => (-phi).max(F::zero()),
        WijsmanTarget::Complement => phi.max(F::zero()),
    }
}

pub fn wijsman_gap_saturated<F: Scalar>(
    seq: &DomainSequence<F>,
    n: u32,
    target: WijsmanTarget,
    probes: &ProbeSet<F>,
    saturation: F,
) -> Result<F, ConvergenceError> {
    let member = seq.member(n)?;
    let limit = seq.limit();
    let mut gap = F::zero();
    for x in probes.points() {
        let a = target_distance(target, member.phi(&x)?).min(saturation);
        let b = target_distance(target, limit.phi(&x)?).min(saturation);
        gap = gap.max((a - b).abs());
    }
    Ok(gap)
}

pub fn wijsman_gap<F: Scalar>(
    seq: &DomainSequence<F>,
    n: u32,
    target: WijsmanTarget,
    probes: &ProbeSet<F>,
) -> Result<F, ConvergenceError> {
    wijsman_gap_saturated(seq, n, target, probes, F::from_f64_c(tol::SATURATION_DEFAULT))
}

/// Two-sided boundary-sampled Hausdorff distance between the closures of two
/// domains, estimated at sampling resolution `h` (accuracy O(h)). A bounding
/// region is required unless both domains are balls.
pub fn hausdorff_distance<F: Scalar>(
    a: &Domain<F>,
    b: &Domain<F>,
    h: F,
    region: Option<&Region<F>>,
) -> Result<F, ConvergenceError> {
    let auto_region;
    let region = match region {
        Some(r) => r,
        None => match (a, b) {
            (
                Domain::Ball { center: ca, radius: ra },
                Domain::Ball { center: cb, radius: rb },
            ) => {
                let lo: Vec<F> = ca
                    .iter()
                    .zip(cb)
                    .map(|(&x, &y)| (x - *ra).min(y - *rb) - h)
                    .collect();
                let hi: Vec<F> = ca
                    .iter()
                    .zip(cb)
                    .map(|(&x, &y)| (x + *ra).max(y + *rb) + h)
                    .collect();
                auto_region = Region::Box { lo, hi };
                &auto_region
            }
            _ => return Err(GeometryError::UnboundedWithoutBox.into()),
        },
    };
    let one_sided = |from: &Domain<F>, to: &Domain<F>| -> Result<F, ConvergenceError> {
        let mut sup = F::zero();
        for p in sample::boundary_points(from, region, h)? {
            // dist(p, closure of `to`) = (phi_to(p))_-.
            let d = (-to.signed_distance(&p)?).max(F::zero());
            sup = sup.max(d);
        }
        Ok(sup)
    };
    Ok(one_sided(a, b)?.max(one_sided(b, a)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotoneDirection {
    Increasing,
    Decreasing,
}

#[derive(Clone, Debug)]
pub struct MonotoneReport<F> {
    /// (n, weak gap) along the tested ladder.
    pub gaps: Vec<(u32, F)>,
    /// Indices where the gap increased beyond the grid allowance.
    pub trend_violations: Vec<u32>,
    pub passed: bool,
}

/// Verify that a declared-monotone sequence drives the weak gap to zero.
/// Membership inclusion is spot-checked on the probes; a violation is a
/// `NotMonotone` error, a non-shrinking gap is a failed report.
pub fn monotone_implies_weak<F: Scalar>(
    seq: &DomainSequence<F>,
    direction: MonotoneDirection,
    probes: &ProbeSet<F>,
    max_index: u32,
) -> Result<MonotoneReport<F>, ConvergenceError> {
    let pts = probes.points();
    let tau = F::tol(1e-9);
    for n in 1..max_index {
        let cur = seq.member(n)?;
        let next = seq.member(n + 1)?;
        for x in &pts {
            let (a, b) = (cur.phi(x)?, next.phi(x)?);
            let violated = match direction {
                // D_n subset of D_{n+1}
                MonotoneDirection::Increasing => a > tau && b < -tau,
                // closure(D_{n+1}) subset of closure(D_n)
                MonotoneDirection::Decreasing => b > tau && a < -tau,
            };
            if violated {
                return Err(ConvergenceError::NotMonotone { index: n, point: to_f64_point(x) });
            }
        }
    }
    let mut gaps = Vec::with_capacity(max_index as usize);
    for n in 1..=max_index {
        gaps.push((n, weak_convergence_gap(seq, n, probes)?));
    }
    let allowance = probes.resolution * F::two() + F::tol(1e-9);
    let mut trend_violations = Vec::new();
    for w in gaps.windows(2) {
        if w[1].1 > w[0].1 + allowance {
            trend_violations.push(w[1].0);
        }
    }
    let passed = trend_violations.is_empty()
        && gaps.last().unwrap().1 <= gaps.first().unwrap().1 + allowance;
    Ok(MonotoneReport { gaps, trend_violations, passed })
}

/// max over sampled V_n within K of dist(x, V_0) — the quantity whose decay
/// is condition (b) of the main convergence theorem. Members must be
/// polyhedral; an empty V_0 reads as +inf when V_n is nonempty.
pub fn exceptional_set_condition_b<F: Scalar>(
    seq: &DomainSequence<F>,
    n: u32,
    probes: &ProbeSet<F>,
) -> Result<F, ConvergenceError> {
    let member = seq.member(n)?;
    let member = member.as_exact().ok_or(ConvergenceError::NotPolyhedral)?;
    if member.as_polyhedron().is_none() {
        return Err(ConvergenceError::NotPolyhedral);
    }
    let limit = seq.limit().as_exact().ok_or(ConvergenceError::NotPolyhedral)?;
    let v_samples = sample::exceptional_points(member, &probes.region, probes.resolution)?;
    let mut worst = F::zero();
    for x in v_samples {
        worst = worst.max(limit.exceptional_set_distance(&x)?);
    }
    Ok(worst)
}

/// sup over matched probe pairs of |f_n(z_n) - f_0(z_0)|, where z_n is the
/// projection of z_0 onto the member's evaluation set (the closure for drift
/// and covariance fields, the smooth boundary for reflection fields) within
/// a search radius of 10 probe resolutions.
pub fn field_convergence_gap<F: Scalar>(
    fields: &FieldSequence<F>,
    seq: &DomainSequence<F>,
    n: u32,
    probes: &ProbeSet<F>,
) -> Result<F, ConvergenceError> {
    let member_domain = seq.member(n)?;
    let member_domain = member_domain
        .as_exact()
        .ok_or_else(|| ConvergenceError::PreconditionFailed("field gaps need exact member domains".into()))?;
    let limit_domain = seq
        .limit()
        .as_exact()
        .ok_or_else(|| ConvergenceError::PreconditionFailed("field gaps need an exact limit domain".into()))?;
    let member_field = fields.member(n);
    let limit_field = fields.limit();
    let radius = probes.resolution * F::from_f64_c(tol::MATCH_RADIUS_FACTOR);
    let mut gap = F::zero();
    let mut used = 0usize;
    let mut first_unmatched: Option<Vec<f64>> = None;
    for x in probes.points() {
        match fields.kind {
            FieldKind::Drift | FieldKind::Covariance => {
                // Evaluation set: the closure of the domain.
                if limit_domain.signed_distance(&x)? < F::zero() {
                    continue;
                }
                let z_n = member_domain.project_to_closure(&x)?;
                if linalg::distance(&z_n, &x) > radius {
                    // No member point near this probe at this index; it
                    // cannot join a matched pair yet.
                    first_unmatched.get_or_insert_with(|| to_f64_point(&x));
                    continue;
                }
                let diff = match (&member_field, limit_field) {
                    (FieldEval::Vector(fm), FieldEval::Vector(fl)) => {
                        linalg::norm(&linalg::sub(&fm(&z_n), &fl(&x)))
                    }
                    (FieldEval::Matrix(fm), FieldEval::Matrix(fl)) => {
                        fm(&z_n).sub_mat(&fl(&x)).frobenius_norm()
                    }
                    _ => {
                        return Err(ConvergenceError::PreconditionFailed(
                            "field evaluator kind mismatch".into(),
                        ))
                    }
                };
                gap = gap.max(diff);
                used += 1;
            }
            FieldKind::Reflection => {
                // Evaluation set: the smooth boundary. Probes are matched by
                // projecting onto the limit boundary first, then onto the
                // member boundary; ambiguous projections (near V) are
                // legitimately excluded.
                let z0 = match limit_domain.nearest_boundary_point(&x) {
                    Ok(bp) => bp,
                    Err(GeometryError::AmbiguousProjection) => continue,
                    Err(e) => return Err(e.into()),
                };
                if linalg::distance(&z0.point, &x) > radius {
                    continue;
                }
                let z_n = match member_domain.nearest_boundary_point(&z0.point) {
                    Ok(bp) => bp,
                    Err(GeometryError::AmbiguousProjection) => continue,
                    Err(e) => return Err(e.into()),
                };
                if linalg::distance(&z_n.point, &z0.point) > radius {
                    first_unmatched.get_or_insert_with(|| to_f64_point(&x));
                    continue;
                }
                let (FieldEval::Reflection(fm), FieldEval::Reflection(fl)) =
                    (&member_field, limit_field)
                else {
                    return Err(ConvergenceError::PreconditionFailed(
                        "reflection gap needs reflection evaluators".into(),
                    ));
                };
                let rm = fm(&z_n)?;
                let rl = fl(&z0)?;
                gap = gap.max(linalg::norm(&linalg::sub(&rm, &rl)));
                used += 1;
            }
        }
    }
    if used == 0 {
        return Err(match first_unmatched {
            Some(probe) => ConvergenceError::ProjectionFailed { probe },
            None => ConvergenceError::InsufficientProbes,
        });
    }
    Ok(gap)
}

/// Smallest n_0 such that K is contained in D_n for every tested
/// n in (n_0, max_index]. Requires a whole-space limit or K strictly inside
/// the limit domain (so containment can stabilize at all).
pub fn compact_containment_index<F: Scalar>(
    seq: &DomainSequence<F>,
    probes: &ProbeSet<F>,
    max_index: u32,
) -> Result<u32, ConvergenceError> {
    let pts = probes.points();
    let limit_ok = match seq.limit() {
        SeqDomain::Exact(Domain::WholeSpace { .. }) => true,
        lim => pts
            .iter()
            .map(|x| lim.phi(x))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|p| p > F::zero()),
    };
    if !limit_ok {
        return Err(ConvergenceError::PreconditionFailed(
            "limit is not the whole space and K is not strictly inside it".into(),
        ));
    }
    let mut n0 = 0u32;
    let mut contained_at_max = false;
    for n in 1..=max_index {
        let member = seq.member(n)?;
        let mut inside = true;
        for x in &pts {
            if member.phi(x)? <= F::zero() {
                inside = false;
                break;
            }
        }
        if !inside {
            n0 = n;
        }
        if n == max_index {
            contained_at_max = inside;
        }
    }
    if !contained_at_max {
        return Err(ConvergenceError::ContainmentNotFound { max_index });
    }
    Ok(n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn probes(lo: f64, hi: f64, h: f64) -> ProbeSet<f64> {
        ProbeSet::new(Region::cube(2, lo, hi), h)
    }

    #[test]
    fn ball_radius_gap_is_exact() {
        // phi_n - phi_0 = a_n - a_0 is constant, so the sup is exact.
        let seq = DomainSequence::ball_family(
            |_| vec![0.0, 0.0],
            |n| 1.0 + 1.0 / n as f64,
            Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
        );
        let p = probes(-2.0, 2.0, 0.25);
        for n in [1u32, 2, 5, 10] {
            let gap = weak_convergence_gap(&seq, n, &p).unwrap();
            assert!((gap - 1.0 / n as f64).abs() < 1e-14, "n={n} gap={gap}");
        }
    }

    #[test]
    fn constant_sequence_gap_zero() {
        let seq = DomainSequence::constant(Domain::orthant(2));
        assert_eq!(weak_convergence_gap(&seq, 3, &probes(-1.0, 2.0, 0.5)).unwrap(), 0.0);
        assert_eq!(
            wijsman_gap(&seq, 3, WijsmanTarget::Boundary, &probes(-1.0, 2.0, 0.5)).unwrap(),
            0.0
        );
    }

    #[test]
    fn slit_discriminates_weak_from_wijsman() {
        let seq: DomainSequence<f64> = DomainSequence::slit_strip();
        let p = ProbeSet::new(Region::Box { lo: vec![-2.0, 0.0], hi: vec![2.0, 2.0] }, 0.05)
            .with_extra(vec![vec![0.0, 1.0]]);
        // Weak gap stays bounded away from zero at the probe (0, 1).
        for n in 1..=10u32 {
            let gap = weak_convergence_gap(&seq, n, &p).unwrap();
            let lower = 1.0 - 2f64.powi(-(n as i32) - 1);
            assert!(gap >= lower - 1e-12, "n={n}: {gap} < {lower}");
        }
        // Wijsman gap (target D) shrinks like the block width.
        let g1 = wijsman_gap(&seq, 1, WijsmanTarget::Domain, &p).unwrap();
        let g8 = wijsman_gap(&seq, 8, WijsmanTarget::Domain, &p).unwrap();
        assert!(g8 < g1);
        assert!(g8 < 0.01, "wijsman gap at n=8: {g8}");
    }

    #[test]
    fn hausdorff_concentric_balls() {
        let a: Domain<f64> = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
        let b: Domain<f64> = Domain::ball(vec![0.0, 0.0], 2.0).unwrap();
        let d = hausdorff_distance(&a, &b, 0.01, None).unwrap();
        assert!((d - 1.0).abs() < 0.02, "got {d}");
        let same = hausdorff_distance(&a, &a.clone(), 0.01, None).unwrap();
        assert!(same < 1e-12);
    }

    #[test]
    fn hausdorff_needs_region_for_unbounded() {
        let a: Domain<f64> = Domain::orthant(2);
        assert!(matches!(
            hausdorff_distance(&a, &a.clone(), 0.1, None),
            Err(ConvergenceError::Geometry(GeometryError::UnboundedWithoutBox))
        ));
    }

    #[test]
    fn rotated_quadrant_hausdorff_grows_with_radius() {
        let alpha = 0.3f64;
        let quad: Domain<f64> = Domain::orthant(2);
        let rot = Domain::polyhedron(
            vec![
                vec![alpha.cos(), alpha.sin()],
                vec![-alpha.sin(), alpha.cos()],
            ],
            vec![0.0, 0.0],
        )
        .unwrap();
        let mut prev = 0.0;
        for r in [4.0, 8.0, 16.0] {
            let region = Region::Ball { center: vec![0.0, 0.0], radius: r };
            let h = 0.01 * r;
            let d = hausdorff_distance(&quad, &rot, h, Some(&region)).unwrap();
            let expect = r * alpha.sin();
            assert!((d - expect).abs() < 0.1 * expect + 2.0 * h, "r={r}: {d} vs {expect}");
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn monotone_expanding_balls_to_half_space() {
        // U(n e1, n) increases to the half-space x1 > 0.
        let seq = DomainSequence::ball_family(
            |n| vec![n as f64, 0.0],
            |n| n as f64,
            Domain::half_space(vec![1.0, 0.0], 0.0).unwrap(),
        );
        let rep = monotone_implies_weak(
            &seq,
            MonotoneDirection::Increasing,
            &probes(-1.5, 1.5, 0.05),
            12,
        )
        .unwrap();
        assert!(rep.passed, "gaps: {:?}", rep.gaps);
        assert!(rep.gaps.last().unwrap().1 < rep.gaps.first().unwrap().1);
    }

    #[test]
    fn monotone_rejects_oscillation() {
        let seq = DomainSequence::ball_family(
            |_| vec![0.0, 0.0],
            |n| if n % 2 == 0 { 2.0 } else { 1.0 },
            Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
        );
        assert!(matches!(
            monotone_implies_weak(&seq, MonotoneDirection::Increasing, &probes(-2.5, 2.5, 0.25), 6),
            Err(ConvergenceError::NotMonotone { .. })
        ));
    }

    #[test]
    fn condition_b_for_shifted_orthant() {
        // Faces x_i >= 1/n: the vertex (1/n, 1/n) approaches V_0 = {0}.
        let seq = DomainSequence::polyhedron_family(
            |n| {
                (
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    vec![1.0 / n as f64, 1.0 / n as f64],
                )
            },
            Domain::orthant(2),
        );
        let p = probes(-2.0, 2.0, 0.1);
        for n in [1u32, 2, 4, 8] {
            let v = exceptional_set_condition_b(&seq, n, &p).unwrap();
            let expect = 2f64.sqrt() / n as f64;
            assert!((v - expect).abs() < 1e-10, "n={n}: {v} vs {expect}");
        }
    }

    #[test]
    fn condition_b_constant_polyhedron_zero() {
        let seq = DomainSequence::constant(Domain::orthant(2));
        let v = exceptional_set_condition_b(&seq, 5, &probes(-1.0, 1.0, 0.1)).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn drift_field_gap_on_common_domain() {
        let seq = DomainSequence::constant(Domain::orthant(2));
        let fields = FieldSequence::new(
            FieldKind::Drift,
            |n| {
                let shift = 1.0 / n as f64;
                FieldEval::Vector(Arc::new(move |_x: &[f64]| vec![shift, 0.0]))
            },
            FieldEval::Vector(Arc::new(|_x: &[f64]| vec![0.0, 0.0])),
        );
        let p = probes(0.0, 2.0, 0.25);
        for n in [1u32, 4, 16] {
            let gap = field_convergence_gap(&fields, &seq, n, &p).unwrap();
            assert!((gap - 1.0 / n as f64).abs() < 1e-14, "n={n}: {gap}");
        }
    }

    #[test]
    fn containment_examples() {
        // Expanding balls: K = closed ball of radius 10 needs n > 10.
        let seq: DomainSequence<f64> = DomainSequence::expanding_balls(vec![0.0, 0.0]);
        let k = ProbeSet::new(Region::Ball { center: vec![0.0, 0.0], radius: 10.0 }, 2.0);
        assert_eq!(compact_containment_index(&seq, &k, 16).unwrap(), 10);
        let origin = ProbeSet::new(Region::Ball { center: vec![0.0, 0.0], radius: 0.0 }, 1.0);
        assert_eq!(compact_containment_index(&seq, &origin, 4).unwrap(), 0);
        // Shifted orthants contain [0,1]^2 for every n >= 1.
        let seq2 = DomainSequence::polyhedron_family(
            |n| {
                (
                    vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    vec![-1.0 / n as f64, -1.0 / n as f64],
                )
            },
            Domain::orthant(2),
        );
        let k2 = ProbeSet::new(Region::cube(2, 0.0, 1.0), 0.25);
        // Precondition: K is NOT strictly inside the limit orthant (corner 0).
        assert!(matches!(
            compact_containment_index(&seq2, &k2, 8),
            Err(ConvergenceError::PreconditionFailed(_))
        ));
        let k3 = ProbeSet::new(Region::cube(2, 0.1, 1.0), 0.25);
        assert_eq!(compact_containment_index(&seq2, &k3, 8).unwrap(), 0);
    }
}
