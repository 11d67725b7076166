//! The exponential family of monogenic functions.
//!
//! For a complex frequency pair `zeta = (zeta1, zeta2)` with complex norm
//! `q = sqrt(zeta1^2 + zeta2^2)` the three members are
//!
//! ```text
//! E1 = e^{i(x1 zeta1 + x2 zeta2)} (cosh(x0 q) - i zc sinh(x0 q)/q)
//! E2 = e^{i(x1 zeta1 + x2 zeta2)} (sinh(x0 q) - i zc cosh(x0 q)/q)
//! E  = E1 - E2 = e^{i(x1 zeta1 + x2 zeta2) - x0 q} (1 + i zc / q)
//! ```
//!
//! with `zc = zeta1 e1 + zeta2 e2`, so `zc^2 = -q^2`. All three are
//! two-sided annihilated by the Cauchy-Riemann operator `D`. `E1` is an even
//! function of the branch choice for `q` and survives `q -> 0` through the
//! entire isotropic cone; `E2` and `E` divide by `q` and refuse isotropic
//! frequencies. The factor `Z = 1 + i zc / q` is a zero divisor of the
//! complexified algebra (`conj(Z) Z = 0`), which is what makes `E`
//! exponentially decaying in `x0` yet monogenic.

use crate::clifford::Clifford;
use crate::error::{Error, Result};
use crate::grid::{CliffordField, Grid3D};
use crate::CliffordC;
use num_complex::Complex64;

/// Relative isotropy threshold: below this, dividing by `q` is meaningless.
const ISOTROPY_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct Frequency {
    pub zeta: [Complex64; 2],
    /// The chosen square root of `zeta1^2 + zeta2^2`.
    q: Complex64,
}

impl Frequency {
    /// Principal branch: `q` has nonnegative real part.
    pub fn new(zeta: [Complex64; 2]) -> Self {
        let q = (zeta[0] * zeta[0] + zeta[1] * zeta[1]).sqrt();
        Frequency { zeta, q }
    }

    /// Force a specific root (e.g. the non-principal branch). Rejects a `q`
    /// that is not actually a square root of `zeta1^2 + zeta2^2`.
    pub fn with_root(zeta: [Complex64; 2], q: Complex64) -> Result<Self> {
        let target = zeta[0] * zeta[0] + zeta[1] * zeta[1];
        let scale = zeta[0].norm_sqr() + zeta[1].norm_sqr() + 1e-300;
        if (q * q - target).norm() > 1e-9 * scale {
            return Err(Error::DomainViolation {
                what: format!("q^2 = {} is not zeta.zeta = {}", q * q, target),
            });
        }
        Ok(Frequency { zeta, q })
    }

    pub fn root(&self) -> Complex64 {
        self.q
    }

    /// Frequency magnitude used for scale decisions.
    pub fn magnitude(&self) -> f64 {
        (self.zeta[0].norm_sqr() + self.zeta[1].norm_sqr()).sqrt()
    }

    /// True when `|q|` is negligible against `|zeta|`: the frequency sits on
    /// the isotropic cone and `E2`, `E` are undefined.
    pub fn is_isotropic(&self) -> bool {
        self.q.norm() <= ISOTROPY_RTOL * self.magnitude().max(1e-300)
    }

    /// `zc = zeta1 e1 + zeta2 e2`.
    pub fn zeta_clifford(&self) -> CliffordC {
        Clifford::new(Complex64::new(0.0, 0.0), self.zeta[0], self.zeta[1], Complex64::new(0.0, 0.0))
    }

    fn require_anisotropic(&self, what: &str) -> Result<()> {
        if self.is_isotropic() {
            return Err(Error::ZeroNorm { what: format!("{what} needs |zeta|_C > 0, zeta = {:?}", self.zeta) });
        }
        Ok(())
    }
}

/// `sinh(z)/z`, series near the origin so the isotropic limit is smooth.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        Complex64::new(1.0, 0.0) + z2 / 6.0 * (Complex64::new(1.0, 0.0) + z2 / 20.0)
    } else {
        z.sinh() / z
    }
}

fn phase(x: [f64; 3], fr: &Frequency) -> Complex64 {
    (Complex64::i() * (fr.zeta[0] * x[1] + fr.zeta[1] * x[2])).exp()
}

/// `E1`, total on all frequencies and independent of the branch of `q`.
pub fn eval_e1(x: [f64; 3], fr: &Frequency) -> CliffordC {
    let p = phase(x, fr);
    let a = fr.q * x[0];
    let c = a.cosh();
    // sinh(x0 q)/q = x0 sinhc(x0 q): even in q, finite at q = 0.
    let s_over_q = sinhc(a) * x[0];
    let m = Complex64::new(0.0, -1.0) * s_over_q;
    Clifford::new(p * c, p * m * fr.zeta[0], p * m * fr.zeta[1], Complex64::new(0.0, 0.0))
}

/// `E2`; odd in the branch of `q`, undefined on the isotropic cone.
pub fn eval_e2(x: [f64; 3], fr: &Frequency) -> Result<CliffordC> {
    fr.require_anisotropic("E2")?;
    let p = phase(x, fr);
    let a = fr.q * x[0];
    let s = a.sinh();
    let c_over_q = a.cosh() / fr.q;
    let m = Complex64::new(0.0, -1.0) * c_over_q;
    Ok(Clifford::new(p * s, p * m * fr.zeta[0], p * m * fr.zeta[1], Complex64::new(0.0, 0.0)))
}

/// `E = E1 - E2`, evaluated directly as `ScE * Z` to avoid cancellation for
/// large `x0 Re q`.
pub fn eval_e(x: [f64; 3], fr: &Frequency) -> Result<CliffordC> {
    let z = zero_divisor_z(fr)?;
    let pre = eval_sc_e(x, fr);
    Ok(z * pre)
}

/// Scalar part of `E`: `e^{i(x1 zeta1 + x2 zeta2) - x0 q}`. No division by
/// `q`, so this stays defined on the isotropic cone (where it is the scalar
/// exponential the conductivity probes are built from).
pub fn eval_sc_e(x: [f64; 3], fr: &Frequency) -> Complex64 {
    (Complex64::i() * (fr.zeta[0] * x[1] + fr.zeta[1] * x[2]) - fr.q * x[0]).exp()
}

/// The idempotent-like zero divisor `Z = 1 + i zc / q`:
/// `Z Z = 2 Z` and `conj(Z) Z = 0`.
pub fn zero_divisor_z(fr: &Frequency) -> Result<CliffordC> {
    fr.require_anisotropic("Z")?;
    let iq = Complex64::i() / fr.q;
    Ok(Clifford::new(
        Complex64::new(1.0, 0.0),
        iq * fr.zeta[0],
        iq * fr.zeta[1],
        Complex64::new(0.0, 0.0),
    ))
}

pub fn e1_field(grid: Grid3D, fr: &Frequency) -> CliffordField<Complex64> {
    CliffordField::from_fn(grid, |x| eval_e1(x, fr))
}

pub fn e2_field(grid: Grid3D, fr: &Frequency) -> Result<CliffordField<Complex64>> {
    fr.require_anisotropic("E2")?;
    Ok(CliffordField::from_fn(grid, |x| eval_e2(x, fr).expect("checked anisotropic")))
}

pub fn e_field(grid: Grid3D, fr: &Frequency) -> Result<CliffordField<Complex64>> {
    fr.require_anisotropic("E")?;
    Ok(CliffordField::from_fn(grid, |x| eval_e(x, fr).expect("checked anisotropic")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{apply_cr, order_estimate, Side};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_freq() -> Frequency {
        Frequency::new([c(2.0, 1.0), c(1.0, -3.0)])
    }

    #[test]
    fn principal_root_of_sample() {
        let fr = sample_freq();
        // sqrt(-5 - 2i), principal branch (computed with 30-digit arithmetic)
        let q = fr.root();
        assert!((q - c(0.43884211690225451, -2.2787238541708497)).norm() < 1e-14);
    }

    #[test]
    fn frozen_point_values() {
        let fr = sample_freq();
        let x = [0.3, -0.2, 0.5];
        let e1 = eval_e1(x, &fr);
        let e2 = eval_e2(x, &fr).unwrap();
        let e = eval_e(x, &fr).unwrap();

        let want_e1 = [
            c(4.3049325819124951, -0.026843671434419857),
            c(1.7284988136199015, -2.9318326084604021),
            c(-4.450265414568543, -1.8335318173757815),
        ];
        let want_e2 = [
            c(0.90569347814006784, -3.4139961505213687),
            c(4.0010474472500475, 1.0950941259945166),
            c(0.73292228694231376, -5.8204852513489707),
        ];
        for k in 0..3 {
            assert!((e1.c[k] - want_e1[k]).norm() < 1e-13 * e1.norm());
            assert!((e2.c[k] - want_e2[k]).norm() < 1e-13 * e2.norm());
            assert!((e.c[k] - (want_e1[k] - want_e2[k])).norm() < 1e-12 * e.norm());
        }
        assert_eq!(e1.c[3], c(0.0, 0.0));
        assert!((e.c[0] - eval_sc_e(x, &fr)).norm() < 1e-15 * e.norm());
    }

    #[test]
    fn difference_identity_and_ratio_identity() {
        let fr = sample_freq();
        for x in [[0.1, 0.2, -0.3], [-0.4, 0.0, 0.25], [0.05, -0.6, 0.4]] {
            let e1 = eval_e1(x, &fr);
            let e2 = eval_e2(x, &fr).unwrap();
            let e = eval_e(x, &fr).unwrap();
            assert!(((e1 - e2) - e).norm() <= 1e-10 * e.norm().max(1.0));

            // E2 = -(i zc / q) E1
            let factor = fr.zeta_clifford() * (Complex64::i() / fr.root()) * c(-1.0, 0.0);
            assert!((factor * e1 - e2).norm() <= 1e-10 * e2.norm());
        }
    }

    #[test]
    fn addition_formula() {
        let fr = Frequency::new([c(-1.3, 0.4), c(0.7, 2.1)]);
        let x = [0.2, -0.1, 0.35];
        let y = [-0.15, 0.3, 0.1];
        let xy = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
        let lhs = eval_e1(x, &fr) * eval_e1(y, &fr);
        let rhs = eval_e1(xy, &fr);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn branch_symmetry() {
        let zeta = [c(2.0, 1.0), c(1.0, -3.0)];
        let pri = Frequency::new(zeta);
        let alt = Frequency::with_root(zeta, -pri.root()).unwrap();
        let x = [0.3, -0.2, 0.5];
        // E1 even, E2 odd under the branch flip.
        assert!((eval_e1(x, &pri) - eval_e1(x, &alt)).norm() < 1e-13 * eval_e1(x, &pri).norm());
        let sum = eval_e2(x, &pri).unwrap() + eval_e2(x, &alt).unwrap();
        assert!(sum.norm() < 1e-13 * eval_e2(x, &pri).unwrap().norm());
    }

    #[test]
    fn with_root_rejects_non_roots() {
        match Frequency::with_root([c(1.0, 0.0), c(0.0, 0.0)], c(2.0, 0.0)) {
            Err(Error::DomainViolation { .. }) => {}
            other => panic!("expected DomainViolation, got {other:?}"),
        }
    }

    #[test]
    fn isotropic_cone_behavior() {
        // zeta = (1, i): zeta.zeta = 0 exactly.
        let fr = Frequency::new([c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(fr.is_isotropic());
        // E1 degenerates to phase * (1 - i zc x0), still finite.
        let x = [0.4, 0.3, -0.2];
        let e1 = eval_e1(x, &fr);
        let p = (Complex64::i() * (fr.zeta[0] * x[1] + fr.zeta[1] * x[2])).exp();
        assert!((e1.c[0] - p).norm() < 1e-12);
        assert!((e1.c[1] - p * c(0.0, -1.0) * fr.zeta[0] * x[0]).norm() < 1e-12);
        for (what, res) in [
            ("E2", eval_e2(x, &fr).map(|_| ())),
            ("E", eval_e(x, &fr).map(|_| ())),
            ("Z", zero_divisor_z(&fr).map(|_| ())),
        ] {
            match res {
                Err(Error::ZeroNorm { .. }) => {}
                other => panic!("{what}: expected ZeroNorm, got {other:?}"),
            }
        }
    }

    #[test]
    fn zero_divisor_algebra() {
        let fr = sample_freq();
        let z = zero_divisor_z(&fr).unwrap();
        let two_z = z * c(2.0, 0.0);
        assert!((z * z - two_z).norm() < 1e-13 * z.norm());
        assert!((z.conj() * z).norm() < 1e-13 * z.norm() * z.norm());
        assert!((z * z.conj()).norm() < 1e-13 * z.norm() * z.norm());
    }

    #[test]
    fn x0_derivative_closed_form() {
        // d/dx0 E1 = -i zc E1 = q E2, algebraically.
        let fr = sample_freq();
        let x = [0.3, -0.2, 0.5];
        let e1 = eval_e1(x, &fr);
        let e2 = eval_e2(x, &fr).unwrap();
        let lhs = fr.zeta_clifford() * c(0.0, -1.0) * e1;
        let rhs = e2 * fr.root();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn discrete_monogenicity_second_order_both_sides() {
        let fr = Frequency::new([c(1.5, 0.5), c(-0.8, 1.2)]);
        let mut errs_l = Vec::new();
        let mut errs_r = Vec::new();
        for n in [17usize, 33] {
            let g = Grid3D::cube(n, 1.0).unwrap();
            let e = e_field(g, &fr).unwrap();
            let denom = e.norm_l2_margin(1);
            errs_l.push(apply_cr(&e, Side::Left, false).norm_l2_margin(1) / denom);
            errs_r.push(apply_cr(&e, Side::Right, false).norm_l2_margin(1) / denom);

            let e1 = e1_field(g, &fr);
            let d1 = apply_cr(&e1, Side::Left, false).norm_l2_margin(1) / e1.norm_l2_margin(1);
            assert!(d1 < 0.05, "E1 residual {d1} at n={n}");
        }
        let pl = order_estimate(errs_l[0], errs_l[1], 2.0);
        let pr = order_estimate(errs_r[0], errs_r[1], 2.0);
        assert!((1.7..2.3).contains(&pl), "left order {pl}, {errs_l:?}");
        assert!((1.7..2.3).contains(&pr), "right order {pr}, {errs_r:?}");
    }
}
