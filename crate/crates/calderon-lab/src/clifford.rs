//! The real Clifford algebra with two anticommuting generators, and its
//! complexification.
//!
//! Basis: `e0` (identity), `e1`, `e2`, `e12 = e1 e2`, with
//! `e1^2 = e2^2 = e12^2 = -e0`. Coefficients live in any [`Scalar`]; over the
//! reals the algebra is a division ring (isomorphic to the quaternions), over
//! the complex numbers it picks up zero divisors, which is exactly what the
//! monogenic exponential machinery exploits.
//!
//! Points of R^3 embed as paravectors `x0 e0 + x1 e1 + x2 e2`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, PartialEq, Default)]
pub struct Clifford<S: Scalar> {
    /// Coefficients on (e0, e1, e2, e12), in that order.
    pub c: [S; 4],
}

impl<S: Scalar> Clifford<S> {
    pub fn new(c0: S, c1: S, c2: S, c12: S) -> Self {
        Clifford { c: [c0, c1, c2, c12] }
    }

    pub fn zero() -> Self {
        Clifford { c: [S::zero(); 4] }
    }

    pub fn one() -> Self {
        Clifford::scalar(S::one())
    }

    pub fn scalar(s: S) -> Self {
        Clifford { c: [s, S::zero(), S::zero(), S::zero()] }
    }

    /// Basis element by index 0..4 (e0, e1, e2, e12).
    pub fn basis(k: usize) -> Self {
        let mut c = [S::zero(); 4];
        c[k] = S::one();
        Clifford { c }
    }

    /// Embed a point of R^3 as the paravector `x0 + x1 e1 + x2 e2`.
    pub fn paravector(x0: S, x1: S, x2: S) -> Self {
        Clifford { c: [x0, x1, x2, S::zero()] }
    }

    /// The (e0, e1, e2) coefficients, i.e. the paravector triple.
    pub fn paravector_parts(&self) -> [S; 3] {
        [self.c[0], self.c[1], self.c[2]]
    }

    /// Scalar (e0) part.
    pub fn sc(&self) -> S {
        self.c[0]
    }

    /// Clifford conjugation: fixes e0, negates e1, e2, e12. Anti-automorphism:
    /// conj(ab) = conj(b) conj(a). Note it never conjugates the coefficients.
    pub fn conj(&self) -> Self {
        Clifford { c: [self.c[0], -self.c[1], -self.c[2], -self.c[3]] }
    }

    /// Grade involution: negates the odd part (e1, e2), an automorphism.
    pub fn involute(&self) -> Self {
        Clifford { c: [self.c[0], -self.c[1], -self.c[2], self.c[3]] }
    }

    /// Bilinear pairing `Sc(conj(a) b) = sum_k a_k b_k`. Bilinear, not
    /// sesquilinear: no coefficient conjugation even over complex scalars.
    pub fn inner(&self, other: &Self) -> S {
        let mut acc = S::zero();
        for k in 0..4 {
            acc += self.c[k] * other.c[k];
        }
        acc
    }

    /// Quadratic form `q(a) = conj(a) a = (sum_k a_k^2) e0`, returned as the
    /// scalar coefficient. Multiplicative: q(ab) = q(a) q(b). Over complex
    /// coefficients it can vanish on nonzero elements.
    pub fn quad(&self) -> S {
        self.inner(self)
    }

    /// Hermitian norm `sqrt(sum_k |a_k|^2)`. Over the reals this coincides
    /// with sqrt(q) and is multiplicative; over the complexes it is only a
    /// vector-space norm.
    pub fn norm(&self) -> S::Real {
        let mut acc = S::Real::zero();
        for k in 0..4 {
            acc = acc + self.c[k].modulus_sq();
        }
        acc.sqrt()
    }

    pub fn scale(&self, r: S::Real) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = x.scale(r);
        }
        Clifford { c }
    }

    /// Inverse `conj(a) / q(a)` when the quadratic form is safely away from
    /// zero relative to the element's size. Zero divisors of the complexified
    /// algebra (e.g. `e0 + i e1`) are reported as `NotInvertible`.
    pub fn try_inverse(&self) -> Result<Self> {
        let q = self.quad();
        let qmag = q.modulus_sq().sqrt();
        let nsq = {
            let n = self.norm();
            n * n
        };
        let threshold = nsq * S::epsilon() * S::Real::from_f64(64.0).unwrap();
        let qmag_f = qmag.to_f64().unwrap_or(0.0);
        let thr_f = threshold.to_f64().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        if qmag_f <= thr_f {
            return Err(Error::NotInvertible { quad_mag: qmag_f, threshold: thr_f });
        }
        let qinv = S::one() / q;
        let mut out = self.conj();
        for x in &mut out.c {
            *x = *x * qinv;
        }
        Ok(out)
    }
}

impl<S: Scalar> Add for Clifford<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for k in 0..4 {
            c[k] += rhs.c[k];
        }
        Clifford { c }
    }
}

impl<S: Scalar> AddAssign for Clifford<S> {
    fn add_assign(&mut self, rhs: Self) {
        for k in 0..4 {
            self.c[k] += rhs.c[k];
        }
    }
}

impl<S: Scalar> Sub for Clifford<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for k in 0..4 {
            c[k] -= rhs.c[k];
        }
        Clifford { c }
    }
}

impl<S: Scalar> SubAssign for Clifford<S> {
    fn sub_assign(&mut self, rhs: Self) {
        for k in 0..4 {
            self.c[k] -= rhs.c[k];
        }
    }
}

impl<S: Scalar> Neg for Clifford<S> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = -*x;
        }
        Clifford { c }
    }
}

impl<S: Scalar> Mul for Clifford<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let [a0, a1, a2, a3] = self.c;
        let [b0, b1, b2, b3] = rhs.c;
        Clifford {
            c: [
                a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
            ],
        }
    }
}

impl<S: Scalar> Mul<S> for Clifford<S> {
    type Output = Self;
    fn mul(self, rhs: S) -> Self {
        let mut c = self.c;
        for x in &mut c {
            *x = *x * rhs;
        }
        Clifford { c }
    }
}

impl<S: Scalar> fmt::Debug for Clifford<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:?}) + ({:?})e1 + ({:?})e2 + ({:?})e12",
            self.c[0], self.c[1], self.c[2], self.c[3]
        )
    }
}

/// Promote real coefficients to complex ones.
pub fn complexify<T>(a: &Clifford<T>) -> Clifford<Complex<T>>
where
    T: crate::scalar::Real + Scalar<Real = T>,
    Complex<T>: Scalar<Real = T>,
{
    Clifford {
        c: [
            Complex::new(a.c[0], T::zero()),
            Complex::new(a.c[1], T::zero()),
            Complex::new(a.c[2], T::zero()),
            Complex::new(a.c[3], T::zero()),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    type R = Clifford<f64>;
    type C = Clifford<Complex64>;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn generator_table() {
        let e: Vec<R> = (0..4).map(R::basis).collect();
        let m = -e[0];
        assert_eq!(e[1] * e[1], m);
        assert_eq!(e[2] * e[2], m);
        assert_eq!(e[3] * e[3], m);
        assert_eq!(e[1] * e[2], e[3]);
        assert_eq!(e[2] * e[1], -e[3]);
        assert_eq!(e[1] * e[3], -e[2]);
        assert_eq!(e[3] * e[1], e[2]);
        assert_eq!(e[2] * e[3], e[1]);
        assert_eq!(e[3] * e[2], -e[1]);
    }

    #[test]
    fn worked_product() {
        // Quaternion-product oracle, computed by hand from the basis table.
        let a = R::new(1.0, 2.0, 3.0, 4.0);
        let b = R::new(5.0, 6.0, 7.0, 8.0);
        assert_eq!(a * b, R::new(-60.0, 12.0, 30.0, 24.0));
        assert_eq!(a.inner(&b), 70.0);
    }

    #[test]
    fn unit_paravector_product() {
        let a = R::new(1.0, 1.0, 0.0, 0.0);
        let b = R::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, R::new(1.0, 1.0, 1.0, 1.0));
    }

    fn pseudo_random(seed: u64) -> impl FnMut() -> f64 {
        // Tiny splitmix; plenty for coverage tests, keeps rand out of the core.
        let mut state = seed;
        move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        }
    }

    fn rand_r(next: &mut impl FnMut() -> f64) -> R {
        R::new(next(), next(), next(), next())
    }

    fn rand_c(next: &mut impl FnMut() -> f64) -> C {
        C::new(
            c64(next(), next()),
            c64(next(), next()),
            c64(next(), next()),
            c64(next(), next()),
        )
    }

    #[test]
    fn conjugation_is_an_anti_automorphism() {
        let mut next = pseudo_random(7);
        for _ in 0..100 {
            let a = rand_r(&mut next);
            let b = rand_r(&mut next);
            let lhs = (a * b).conj();
            let rhs = b.conj() * a.conj();
            assert!((lhs - rhs).norm() <= 1e-14 * (a.norm() * b.norm()));
        }
        let mut next = pseudo_random(8);
        for _ in 0..100 {
            let a = rand_c(&mut next);
            let b = rand_c(&mut next);
            let lhs = (a * b).conj();
            let rhs = b.conj() * a.conj();
            assert!((lhs - rhs).norm() <= 1e-14 * (a.norm() * b.norm()));
        }
    }

    #[test]
    fn involution_is_an_automorphism_and_conj_is_involutive() {
        let mut next = pseudo_random(9);
        for _ in 0..100 {
            let a = rand_r(&mut next);
            let b = rand_r(&mut next);
            let lhs = (a * b).involute();
            let rhs = a.involute() * b.involute();
            assert!((lhs - rhs).norm() <= 1e-14 * (a.norm() * b.norm()));
            assert_eq!(a.conj().conj(), a);
        }
    }

    #[test]
    fn quadratic_form_is_multiplicative() {
        let mut next = pseudo_random(11);
        for _ in 0..100 {
            let a = rand_c(&mut next);
            let b = rand_c(&mut next);
            let lhs = (a * b).quad();
            let rhs = a.quad() * b.quad();
            let scale = (a.norm() * b.norm()).powi(2).max(1.0);
            assert!((lhs - rhs).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn real_norm_is_multiplicative() {
        let mut next = pseudo_random(13);
        for _ in 0..100 {
            let a = rand_r(&mut next);
            let b = rand_r(&mut next);
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1.0));
        }
    }

    #[test]
    fn inverse_roundtrip_real() {
        let mut next = pseudo_random(17);
        for _ in 0..50 {
            let a = rand_r(&mut next);
            if a.norm() < 1e-3 {
                continue;
            }
            let inv = a.try_inverse().unwrap();
            assert!(((a * inv) - R::one()).norm() < 1e-13);
            assert!(((inv * a) - R::one()).norm() < 1e-13);
        }
    }

    #[test]
    fn complex_zero_divisor_is_not_invertible() {
        // q(e0 + i e1) = 1 + (i)^2 = 0.
        let z = C::new(c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, 0.0), c64(0.0, 0.0));
        assert_eq!(z.quad(), c64(0.0, 0.0));
        match z.try_inverse() {
            Err(Error::NotInvertible { .. }) => {}
            other => panic!("expected NotInvertible, got {other:?}"),
        }
        // And the zero divisor actually divides zero: z * conj(z) = 0.
        assert!((z * z.conj()).norm() == 0.0);
    }

    #[test]
    fn inner_is_bilinear_not_sesquilinear() {
        let i = c64(0.0, 1.0);
        let a = C::new(c64(1.0, 0.0), c64(2.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
        let b = C::new(c64(3.0, 0.0), c64(5.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0));
        let scaled = a * i;
        assert_eq!(scaled.inner(&b), a.inner(&b) * i);
    }

    #[test]
    fn scalar_part_of_product_is_symmetric() {
        let mut next = pseudo_random(23);
        for _ in 0..100 {
            let a = rand_r(&mut next);
            let b = rand_r(&mut next);
            assert!(((a * b).sc() - (b * a).sc()).abs() < 1e-13 * (a.norm() * b.norm() + 1.0));
        }
    }

    #[test]
    fn complexify_embeds() {
        let a = R::new(1.0, -2.0, 3.0, -4.0);
        let ac = complexify(&a);
        assert_eq!(ac.c[3], c64(-4.0, 0.0));
        assert_eq!(ac.norm(), a.norm());
    }
}
