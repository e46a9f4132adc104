//! Corner-avoidance criterion for an SRBM in the orthant: with R having unit
//! diagonal, nonpositive off-diagonal entries and spectral radius of I - R
//! below one, the process avoids the non-smooth boundary parts iff
//! r_ij a_jj + r_ji a_ii >= 2 a_ij for all pairs.

use super::matrix_ops::spectral_radius;
use super::ModelError;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::tol;

/// A d x m reflection matrix; column i is the reflection direction on face i.
/// For the orthant checker m = d.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionMatrix<F>(pub Mat<F>);

impl<F: Scalar> ReflectionMatrix<F> {
    pub fn identity(d: usize) -> Self {
        Self(Mat::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn num_faces(&self) -> usize {
        self.0.cols()
    }

    pub fn column(&self, i: usize) -> Vec<F> {
        self.0.col(i)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HittingReport<F> {
    pub avoids_corners: bool,
    /// Pairs (i, j) violating r_ij a_jj + r_ji a_ii >= 2 a_ij.
    pub violations: Vec<(usize, usize)>,
    pub spectral_radius_i_minus_r: F,
}

/// Normalize an oblique reflection vector so that r.n = 1; rejects vectors
/// that are tangential or point outward (r.n <= 1e-10).
pub fn normalize_reflection<F: Scalar>(r: &[F], n: &[F]) -> Result<Vec<F>, ModelError> {
    if r.len() != n.len() {
        return Err(ModelError::DimensionMismatch { expected: n.len(), got: r.len() });
    }
    let rn = crate::linalg::dot(r, n);
    if rn <= F::tol(tol::INWARD_MIN) {
        return Err(ModelError::NotInwardPointing { dot: rn.to_f64_c() });
    }
    Ok(r.iter().map(|&c| c / rn).collect())
}

/// Evaluate the corner-avoidance inequality for `SRBM(R, mu, A)` in the
/// orthant. Structural hypotheses are checked first and reported as
/// `HypothesesNotMet`; non-square R is `Unsupported` (general polyhedra are
/// out of this checker's scope).
pub fn check_hitting_condition<F: Scalar>(
    r: &ReflectionMatrix<F>,
    a: &Mat<F>,
) -> Result<HittingReport<F>, ModelError> {
    let rm = &r.0;
    if !rm.is_square() {
        return Err(ModelError::Unsupported);
    }
    let d = rm.rows();
    if !a.is_square() || a.rows() != d {
        return Err(ModelError::DimensionMismatch { expected: d, got: a.rows() });
    }
    let asym = a.asymmetry();
    if asym > F::tol(tol::SYMMETRY) {
        return Err(ModelError::NotSymmetric { asymmetry: asym.to_f64_c() });
    }
    let tol_diag = F::tol(tol::SYMMETRY);
    for i in 0..d {
        if (rm[(i, i)] - F::one()).abs() > tol_diag {
            return Err(ModelError::HypothesesNotMet {
                reason: format!("diagonal entry r_{}{} = {} is not 1", i, i, rm[(i, i)]),
            });
        }
        for j in 0..d {
            if i != j && rm[(i, j)] > tol_diag {
                return Err(ModelError::HypothesesNotMet {
                    reason: format!("off-diagonal entry r_{}{} = {} is positive", i, j, rm[(i, j)]),
                });
            }
        }
    }
    let i_minus_r = Mat::identity(d).sub_mat(rm);
    let rho = spectral_radius(&i_minus_r)?;
    if !(rho < F::one()) {
        return Err(ModelError::HypothesesNotMet {
            reason: format!("spectral radius of I - R is {rho}, not < 1"),
        });
    }
    let mut violations = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let lhs = rm[(i, j)] * a[(j, j)] + rm[(j, i)] * a[(i, i)];
            if lhs < F::two() * a[(i, j)] {
                violations.push((i, j));
            }
        }
    }
    Ok(HittingReport { avoids_corners: violations.is_empty(), violations, spectral_radius_i_minus_r: rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let r = normalize_reflection(&[2.0, -1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(r, vec![1.0, -0.5]);
        let n: Vec<f64> = vec![0.6, 0.8];
        let same = normalize_reflection(&n, &n).unwrap();
        assert!((same[0] - 0.6).abs() < 1e-15 && (same[1] - 0.8).abs() < 1e-15);
        assert!(matches!(
            normalize_reflection(&[0.0, 1.0], &[1.0, 0.0]),
            Err(ModelError::NotInwardPointing { .. })
        ));
    }

    #[test]
    fn normalize_idempotent() {
        let n = vec![1.0, 0.0];
        let r1 = normalize_reflection(&[3.0, 4.0], &n).unwrap();
        let r2 = normalize_reflection(&r1, &n).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn hitting_identity_equality_case() {
        let r: ReflectionMatrix<f64> = ReflectionMatrix::identity(2);
        let rep = check_hitting_condition(&r, &Mat::identity(2)).unwrap();
        assert!(rep.avoids_corners);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn hitting_correlated_covariance_fails() {
        let r: ReflectionMatrix<f64> = ReflectionMatrix::identity(2);
        let a = Mat::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let rep = check_hitting_condition(&r, &a).unwrap();
        assert!(!rep.avoids_corners);
        assert_eq!(rep.violations, vec![(0, 1)]);
    }

    #[test]
    fn hitting_negative_offdiag_fails_inequality() {
        // r_12 a_22 + r_21 a_11 = -0.5 < 0 = 2 a_12.
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -0.2], vec![-0.3, 1.0]]));
        let rep = check_hitting_condition(&r, &Mat::identity(2)).unwrap();
        assert!((rep.spectral_radius_i_minus_r - 0.06f64.sqrt()).abs() < 1e-8);
        assert!(!rep.avoids_corners);
    }

    #[test]
    fn hitting_structural_rejections() {
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, 0.2], vec![0.0, 1.0]]));
        assert!(matches!(
            check_hitting_condition(&r, &Mat::identity(2)),
            Err(ModelError::HypothesesNotMet { .. })
        ));
        let r = ReflectionMatrix(Mat::from_rows(&[vec![0.9, 0.0], vec![0.0, 1.0]]));
        assert!(matches!(
            check_hitting_condition(&r, &Mat::identity(2)),
            Err(ModelError::HypothesesNotMet { .. })
        ));
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -3.0], vec![-3.0, 1.0]]));
        assert!(matches!(
            check_hitting_condition(&r, &Mat::identity(2)),
            Err(ModelError::HypothesesNotMet { .. })
        ));
        // Non-square: out of the orthant checker's scope.
        let r: ReflectionMatrix<f64> = ReflectionMatrix(Mat::zeros(2, 3));
        assert!(matches!(check_hitting_condition(&r, &Mat::identity(2)), Err(ModelError::Unsupported)));
    }

    #[test]
    fn hitting_permutation_invariance() {
        let r = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -0.2], vec![-0.3, 1.0]]));
        let a = Mat::from_rows(&[vec![2.0, 0.1], vec![0.1, 1.0]]);
        let rep = check_hitting_condition(&r, &a).unwrap();
        // Swap coordinates 0 and 1 in both R and A.
        let rp = ReflectionMatrix(Mat::from_rows(&[vec![1.0, -0.3], vec![-0.2, 1.0]]));
        let ap = Mat::from_rows(&[vec![1.0, 0.1], vec![0.1, 2.0]]);
        let rep_p = check_hitting_condition(&rp, &ap).unwrap();
        assert_eq!(rep.avoids_corners, rep_p.avoids_corners);
        assert_eq!(rep.violations.len(), rep_p.violations.len());
    }
}
