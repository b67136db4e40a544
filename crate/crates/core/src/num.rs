//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the crate is generic over (`f32` or `f64`).
///
/// Accuracy targets quoted in the docs assume `f64`; the `f32`
/// instantiation is usable with tolerances loosened accordingly.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion used when calling `f64`-only special functions.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `e^{-i x}` for real `x`.
#[inline]
pub(crate) fn expi_neg<T: Real>(x: T) -> Complex<T> {
    let (s, co) = x.sin_cos();
    Complex::new(co, -s)
}

/// Principal-branch logarithm that treats a signed-zero imaginary part
/// as `+0`, so real negative arguments land on the upper lip of the cut.
#[inline]
pub(crate) fn ln_upper<T: Real>(z: Complex<T>) -> Complex<T> {
    Complex::new(z.re, z.im + T::zero()).ln()
}
