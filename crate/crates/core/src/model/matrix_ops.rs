//! Symmetric positive definite square roots and spectral radii.

use super::ModelError;
use crate::linalg::{symmetric_eigen, Mat};
use crate::scalar::Scalar;
use crate::tol;

/// The symmetric positive definite square root of a symmetric PD matrix,
/// via spectral decomposition. Gates: asymmetry <= 1e-12, eigenvalues > 1e-12.
pub fn psd_sqrt<F: Scalar>(a: &Mat<F>) -> Result<Mat<F>, ModelError> {
    if !a.is_square() {
        return Err(ModelError::NotSquare);
    }
    let asym = a.asymmetry();
    if asym > F::tol(tol::SYMMETRY) {
        return Err(ModelError::NotSymmetric { asymmetry: asym.to_f64_c() });
    }
    let (w, v) = symmetric_eigen(a);
    if let Some(&bad) = w.iter().find(|&&lam| lam <= F::tol(tol::PD_MIN_EIG)) {
        return Err(ModelError::NotPD { eigenvalue: bad.to_f64_c() });
    }
    let sqrt_w: Vec<F> = w.iter().map(|&lam| lam.sqrt()).collect();
    let s = v.matmul(&Mat::diag(&sqrt_w)).matmul(&v.transpose());
    // Symmetrize away rounding from the triple product.
    let mut s2 = s.clone();
    let n = s.rows();
    for i in 0..n {
        for j in 0..n {
            s2[(i, j)] = (s[(i, j)] + s[(j, i)]) * F::half();
        }
    }
    Ok(s2)
}

/// Largest eigenvalue modulus. Computed by normalized repeated squaring
/// (Gelfand's formula rho = lim ||M^{2^k}||^{1/2^k}), which converges for
/// complex and defective spectra alike; accuracy well inside 1e-8 for the
/// desk-scale matrices this crate handles. Returns 0 for the zero matrix.
pub fn spectral_radius<F: Scalar>(m: &Mat<F>) -> Result<F, ModelError> {
    if !m.is_square() {
        return Err(ModelError::NotSquare);
    }
    let n = m.rows();
    if n == 0 {
        return Ok(F::zero());
    }
    let mut b = m.clone();
    // log rho estimate = sum_i 2^-i log s_i + 2^-k log ||B_k||_F,
    // where B_{i+1} = (B_i / s_i)^2.
    let mut acc = F::zero();
    let mut pow = F::one(); // 2^-i
    for _ in 0..64 {
        let s = b.frobenius_norm();
        if s == F::zero() || !s.is_finite() {
            return Ok(F::zero());
        }
        acc = acc + pow * s.ln();
        let scaled = b.scaled(F::one() / s);
        b = scaled.matmul(&scaled);
        pow = pow * F::half();
    }
    let tail = b.frobenius_norm();
    if tail == F::zero() {
        return Ok(F::zero());
    }
    acc = acc + pow * tail.ln();
    Ok(acc.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_identity() {
        let i: Mat<f64> = Mat::identity(3);
        let s = psd_sqrt(&i).unwrap();
        assert!(s.sub_mat(&i).frobenius_norm() < 1e-14);
    }

    #[test]
    fn sqrt_diagonal() {
        let a: Mat<f64> = Mat::diag(&[4.0, 9.0]);
        let s = psd_sqrt(&a).unwrap();
        assert!((s[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)] - 3.0).abs() < 1e-12);
        assert!(s[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn sqrt_reconstructs() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let s = psd_sqrt(&a).unwrap();
        assert!(s.matmul(&s).sub_mat(&a).frobenius_norm() < 1e-10);
        assert!(s.asymmetry() < 1e-14);
    }

    #[test]
    fn sqrt_rejects_asymmetric_and_indefinite() {
        let a = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(psd_sqrt(&a), Err(ModelError::NotSymmetric { .. })));
        let b = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(psd_sqrt(&b), Err(ModelError::NotPD { .. })));
    }

    #[test]
    fn spectral_radius_closed_forms() {
        let z: Mat<f64> = Mat::zeros(3, 3);
        assert_eq!(spectral_radius(&z).unwrap(), 0.0);
        let d: Mat<f64> = Mat::diag(&[0.5, -0.9]);
        assert!((spectral_radius(&d).unwrap() - 0.9).abs() < 1e-8);
        let m = Mat::from_rows(&[vec![0.0, 0.2], vec![0.3, 0.0]]);
        assert!((spectral_radius(&m).unwrap() - 0.06f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn spectral_radius_rotation() {
        // Equal-modulus complex pair.
        let c = 0.6f64;
        let s = 0.8f64;
        let m = Mat::from_rows(&[vec![0.5 * c, -0.5 * s], vec![0.5 * s, 0.5 * c]]);
        assert!((spectral_radius(&m).unwrap() - 0.5).abs() < 1e-8);
    }
}
