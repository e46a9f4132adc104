//! Scalar abstraction: the numerical core is generic over the floating-point
//! type. `f64` is the reference instantiation (all documented tolerances are
//! stated for it); `f32` gets the same tolerances rescaled by machine epsilon.

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Machine epsilon of the concrete type.
    fn eps() -> Self;

    fn from_f64_c(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite f64 constant")
    }

    fn to_f64_c(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Rescale an f64-referenced tolerance to this type: identity for `f64`,
    /// widened by the epsilon ratio for narrower types.
    fn tol(t: f64) -> Self {
        Self::from_f64_c(t * (Self::eps().to_f64_c() / f64::EPSILON))
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::from_f64_c(0.5)
    }
}

impl Scalar for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Scalar for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_rescaling() {
        assert_eq!(<f64 as Scalar>::tol(1e-12), 1e-12);
        let t32 = <f32 as Scalar>::tol(1e-12);
        // 1e-12 * (1.19e-7 / 2.2e-16) ~ 5.4e-4
        assert!(t32 > 1e-4 && t32 < 1e-2, "got {t32}");
    }
}
