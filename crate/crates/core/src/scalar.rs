//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real field the operator algebra is generic over (`f32` or `f64`).
///
/// Tolerances throughout the crate are written as `f64` literals and lifted
/// with [`Real::lit`]; they are tuned for `f64`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {
    /// Lift an `f64` constant into the scalar type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("constant representable in scalar type")
    }

    /// Lower to `f64` for reporting.
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<R> = Complex<R>;
pub type CMatrix<R> = DMatrix<Complex<R>>;
pub type CVector<R> = DVector<Complex<R>>;

#[inline]
pub(crate) fn c<R: Real>(re: R) -> Complex<R> {
    Complex::new(re, R::zero())
}

/// η(x) = −x ln x with η(0) = 0. Non-positive arguments map to 0.
#[inline]
pub fn eta<R: Real>(x: R) -> R {
    if x > R::zero() {
        -x * x.ln()
    } else {
        R::zero()
    }
}
