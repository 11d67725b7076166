//! Scalar abstraction for the algebra and calculus layers.
//!
//! The Clifford algebra here is defined over a commutative coefficient ring;
//! in practice that is `f32`, `f64`, or their complexifications. The trait
//! deliberately distinguishes the *algebraic* square `x * x` (which enters
//! the quadratic form and can vanish for complex coefficients) from the
//! *Hermitian* magnitude `|x|^2` (which enters norms and never cancels).

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};
use std::fmt::Debug;
use std::iter::Sum;
use std::ops::Neg;

pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Default + 'static
{
}
impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Default + 'static
{
}

pub trait Scalar:
    Copy + PartialEq + Debug + Default + Num + NumAssign + Neg<Output = Self> + Sum + 'static
{
    type Real: Real;

    fn from_real(r: Self::Real) -> Self;

    /// Multiply by a real scalar.
    fn scale(self, r: Self::Real) -> Self;

    /// Hermitian magnitude squared: `|x|^2 >= 0`.
    fn modulus_sq(self) -> Self::Real;

    /// Real part (identity for real scalars).
    fn real_part(self) -> Self::Real;

    fn epsilon() -> Self::Real {
        Self::Real::epsilon()
    }
}

impl Scalar for f64 {
    type Real = f64;

    fn from_real(r: f64) -> Self {
        r
    }
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn modulus_sq(self) -> f64 {
        self * self
    }
    fn real_part(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    type Real = f32;

    fn from_real(r: f32) -> Self {
        r
    }
    fn scale(self, r: f32) -> Self {
        self * r
    }
    fn modulus_sq(self) -> f32 {
        self * self
    }
    fn real_part(self) -> f32 {
        self
    }
}

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    fn from_real(r: T) -> Self {
        Complex::new(r, T::zero())
    }
    fn scale(self, r: T) -> Self {
        Complex::new(self.re * r, self.im * r)
    }
    fn modulus_sq(self) -> T {
        self.re * self.re + self.im * self.im
    }
    fn real_part(self) -> T {
        self.re
    }
}
