//! Closed-form coefficient fields. Constant and affine forms are first-class
//! so the simulator can precompute; arbitrary analytic forms register as
//! closures (which must be side-effect-free: ensembles evaluate them from
//! many threads).

use std::sync::Arc;

use super::matrix_ops::psd_sqrt;
use super::{normalize_reflection, ModelError, ReflectionMatrix};
use crate::geometry::BoundaryPoint;
use crate::linalg::Mat;
use crate::scalar::Scalar;
use crate::tol;

#[derive(Clone)]
pub enum VectorField<F> {
    Constant(Vec<F>),
    /// x -> offset + matrix x
    Affine { offset: Vec<F>, matrix: Mat<F> },
    Custom(Arc<dyn Fn(&[F]) -> Vec<F> + Send + Sync>),
}

impl<F: Scalar> VectorField<F> {
    pub fn zero(dim: usize) -> Self {
        VectorField::Constant(vec![F::zero(); dim])
    }

    pub fn eval(&self, x: &[F]) -> Vec<F> {
        match self {
            VectorField::Constant(v) => v.clone(),
            VectorField::Affine { offset, matrix } => {
                let mut out = matrix.matvec(x);
                for (o, &b) in out.iter_mut().zip(offset) {
                    *o = *o + b;
                }
                out
            }
            VectorField::Custom(f) => f(x),
        }
    }

    pub fn as_constant(&self) -> Option<&[F]> {
        match self {
            VectorField::Constant(v) => Some(v),
            _ => None,
        }
    }
}

impl<F: std::fmt::Debug> std::fmt::Debug for VectorField<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VectorField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            VectorField::Affine { .. } => f.write_str("Affine"),
            VectorField::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Clone)]
pub enum MatrixField<F> {
    Constant(Mat<F>),
    Custom(Arc<dyn Fn(&[F]) -> Mat<F> + Send + Sync>),
}

impl<F: Scalar> MatrixField<F> {
    pub fn identity(dim: usize) -> Self {
        MatrixField::Constant(Mat::identity(dim))
    }

    pub fn eval(&self, x: &[F]) -> Mat<F> {
        match self {
            MatrixField::Constant(m) => m.clone(),
            MatrixField::Custom(f) => f(x),
        }
    }

    pub fn as_constant(&self) -> Option<&Mat<F>> {
        match self {
            MatrixField::Constant(m) => Some(m),
            _ => None,
        }
    }
}

impl<F: std::fmt::Debug> std::fmt::Debug for MatrixField<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatrixField::Constant(_) => f.write_str("Constant"),
            MatrixField::Custom(_) => f.write_str("Custom"),
        }
    }
}

#[derive(Clone)]
pub enum ReflectionField<F> {
    /// r(z) = n(z).
    Normal,
    /// Constant direction (half-spaces, balls); normalized on evaluation.
    Constant(Vec<F>),
    /// Per-face columns of a d x m reflection matrix (polyhedra).
    PerFace(ReflectionMatrix<F>),
    Custom(Arc<dyn Fn(&BoundaryPoint<F>) -> Vec<F> + Send + Sync>),
}

impl<F: Scalar> ReflectionField<F> {
    /// Evaluate at a boundary point and normalize so r.n = 1 (the oblique
    /// reflection normalization assumption).
    pub fn eval(&self, z: &BoundaryPoint<F>) -> Result<Vec<F>, ModelError> {
        let raw = match self {
            ReflectionField::Normal => z.inward_normal.clone(),
            ReflectionField::Constant(v) => v.clone(),
            ReflectionField::PerFace(r) => {
                let face = z.face.ok_or(ModelError::Unsupported)?;
                if face >= r.num_faces() {
                    return Err(ModelError::DimensionMismatch { expected: r.num_faces(), got: face });
                }
                r.column(face)
            }
            ReflectionField::Custom(f) => f(z),
        };
        normalize_reflection(&raw, &z.inward_normal)
    }
}

impl<F: std::fmt::Debug> std::fmt::Debug for ReflectionField<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReflectionField::Normal => f.write_str("Normal"),
            ReflectionField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            ReflectionField::PerFace(_) => f.write_str("PerFace"),
            ReflectionField::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// Drift g, covariance A (sigma = A^{1/2}), reflection field and start point.
#[derive(Clone, Debug)]
pub struct DiffusionSpec<F> {
    pub drift: VectorField<F>,
    pub covariance: MatrixField<F>,
    pub reflection: ReflectionField<F>,
    pub start: Vec<F>,
}

impl<F: Scalar> DiffusionSpec<F> {
    /// Standard driftless unit-covariance diffusion with normal reflection.
    pub fn standard(dim: usize, start: Vec<F>) -> Self {
        Self {
            drift: VectorField::zero(dim),
            covariance: MatrixField::identity(dim),
            reflection: ReflectionField::Normal,
            start,
        }
    }

    pub fn dim(&self) -> usize {
        self.start.len()
    }

    /// sigma(x) = A(x)^{1/2}, with the symmetry/PD gates applied.
    pub fn sigma(&self, x: &[F]) -> Result<Mat<F>, ModelError> {
        psd_sqrt(&self.covariance.eval(x))
    }

    /// Validate the covariance gates at a set of probe points.
    pub fn validate_at(&self, probes: &[Vec<F>]) -> Result<(), ModelError> {
        for x in probes {
            if x.len() != self.dim() {
                return Err(ModelError::DimensionMismatch { expected: self.dim(), got: x.len() });
            }
            let a = self.covariance.eval(x);
            let asym = a.asymmetry();
            if asym > F::tol(tol::SYMMETRY) {
                return Err(ModelError::NotSymmetric { asymmetry: asym.to_f64_c() });
            }
            psd_sqrt(&a)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_eval() {
        let f = VectorField::Constant(vec![1.0, 2.0]);
        assert_eq!(f.eval(&[5.0, 5.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn affine_field_eval() {
        let f = VectorField::Affine {
            offset: vec![1.0, 0.0],
            matrix: Mat::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]),
        };
        assert_eq!(f.eval(&[2.0, 3.0]), vec![4.0, -2.0]);
    }

    #[test]
    fn reflection_field_normalizes() {
        let z = BoundaryPoint { point: vec![0.0, 7.0], inward_normal: vec![1.0, 0.0], face: None };
        let r = ReflectionField::Constant(vec![2.0, 2.0]).eval(&z).unwrap();
        assert_eq!(r, vec![1.0, 1.0]);
        let n = ReflectionField::Normal.eval(&z).unwrap();
        assert_eq!(n, vec![1.0, 0.0]);
    }

    #[test]
    fn per_face_reflection() {
        let rm = ReflectionMatrix(Mat::from_rows(&[vec![1.0, 0.0], vec![-0.5, 1.0]]));
        let z = BoundaryPoint { point: vec![0.0, 2.0], inward_normal: vec![1.0, 0.0], face: Some(0) };
        let r = ReflectionField::PerFace(rm).eval(&z).unwrap();
        assert_eq!(r, vec![1.0, -0.5]);
    }

    #[test]
    fn spec_validation_rejects_indefinite() {
        let mut spec = DiffusionSpec::standard(2, vec![0.0, 0.0]);
        spec.covariance =
            MatrixField::Constant(Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]));
        assert!(matches!(spec.validate_at(&[vec![0.0, 0.0]]), Err(ModelError::NotPD { .. })));
    }
}
