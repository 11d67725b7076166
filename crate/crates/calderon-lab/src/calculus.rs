//! Discrete first-order calculus: central differences, the vector-calculus
//! trio, and the Cauchy-Riemann (Dirac) operators of the algebra.
//!
//! `D = d/dx0 + e1 d/dx1 + e2 d/dx2` and its conjugate `Dbar` act from the
//! left or the right on algebra-valued fields. All stencils are second-order
//! central differences written on the margin-1 interior; composed operators
//! shrink the valid region by one ring per application, and callers account
//! for that with margin-aware norms.
//!
//! Two discrete facts the tests lean on:
//! * `D Dbar = Dbar D` holds up to rounding (the mixed second differences
//!   commute exactly as shift operators), and both equal the wide Laplacian
//!   `sum_j d2/dx_j^2` built from doubled central differences.
//! * Central differencing is exact on quadratics, so manufactured polynomial
//!   cases produce residuals at rounding level rather than O(h^2).

use crate::clifford::Clifford;
use crate::error::Result;
use crate::grid::{CliffordField, ScalarField, VectorField3};
use crate::scalar::Scalar;
use crate::sums::pairwise_sum_scalar_by;
use num_traits::FromPrimitive;

fn real<S: Scalar>(x: f64) -> S::Real {
    S::Real::from_f64(x).expect("finite f64 converts")
}

/// Central difference along `axis`, written on the margin-1 interior.
pub fn diff_central<S: Scalar>(f: &ScalarField<S>, axis: usize) -> ScalarField<S> {
    let mut out = ScalarField::zeros(f.grid);
    let s = f.grid.strides()[axis];
    let inv2h = real::<S>(1.0 / (2.0 * f.grid.h));
    f.grid.for_each_margin(1, |_, idx| {
        out.data[idx] = (f.data[idx + s] - f.data[idx - s]).scale(inv2h);
    });
    out
}

pub fn grad_h<S: Scalar>(f: &ScalarField<S>) -> VectorField3<S> {
    let mut out = VectorField3::zeros(f.grid);
    let s = f.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * f.grid.h));
    f.grid.for_each_margin(1, |_, idx| {
        out.data[idx] = [
            (f.data[idx + s[0]] - f.data[idx - s[0]]).scale(inv2h),
            (f.data[idx + s[1]] - f.data[idx - s[1]]).scale(inv2h),
            (f.data[idx + s[2]] - f.data[idx - s[2]]).scale(inv2h),
        ];
    });
    out
}

pub fn div_h<S: Scalar>(v: &VectorField3<S>) -> ScalarField<S> {
    let mut out = ScalarField::zeros(v.grid);
    let s = v.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * v.grid.h));
    v.grid.for_each_margin(1, |_, idx| {
        let d0 = (v.data[idx + s[0]][0] - v.data[idx - s[0]][0]).scale(inv2h);
        let d1 = (v.data[idx + s[1]][1] - v.data[idx - s[1]][1]).scale(inv2h);
        let d2 = (v.data[idx + s[2]][2] - v.data[idx - s[2]][2]).scale(inv2h);
        out.data[idx] = (d0 + d1) + d2;
    });
    out
}

pub fn curl_h<S: Scalar>(v: &VectorField3<S>) -> VectorField3<S> {
    let mut out = VectorField3::zeros(v.grid);
    let s = v.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * v.grid.h));
    v.grid.for_each_margin(1, |_, idx| {
        let d = |axis: usize, k: usize| {
            (v.data[idx + s[axis]][k] - v.data[idx - s[axis]][k]).scale(inv2h)
        };
        out.data[idx] = [
            d(1, 2) - d(2, 1),
            d(2, 0) - d(0, 2),
            d(0, 1) - d(1, 0),
        ];
    });
    out
}

/// Seven-point Laplacian, margin-1 interior. Exact on quadratics.
pub fn laplace_h<S: Scalar>(f: &ScalarField<S>) -> ScalarField<S> {
    let mut out = ScalarField::zeros(f.grid);
    let s = f.grid.strides();
    let invh2 = real::<S>(1.0 / (f.grid.h * f.grid.h));
    let six = S::from_real(real::<S>(6.0));
    f.grid.for_each_margin(1, |_, idx| {
        let sum = ((f.data[idx + s[0]] + f.data[idx - s[0]])
            + (f.data[idx + s[1]] + f.data[idx - s[1]]))
            + (f.data[idx + s[2]] + f.data[idx - s[2]]);
        out.data[idx] = (sum - six * f.data[idx]).scale(invh2);
    });
    out
}

/// Wide Laplacian: composition of two central differences per axis
/// (stencil reach 2, margin-2 interior). This is the operator that
/// `D Dbar` factors into exactly.
pub fn laplace_wide_h<S: Scalar>(f: &ScalarField<S>) -> ScalarField<S> {
    let mut out = ScalarField::zeros(f.grid);
    let s = f.grid.strides();
    let inv4h2 = real::<S>(1.0 / (4.0 * f.grid.h * f.grid.h));
    let two = S::from_real(real::<S>(2.0));
    f.grid.for_each_margin(2, |_, idx| {
        let mut acc = S::zero();
        for &st in &s {
            acc += (f.data[idx + 2 * st] - two * f.data[idx]) + f.data[idx - 2 * st];
        }
        out.data[idx] = acc.scale(inv4h2);
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Apply `D` (or `Dbar` with `bar = true`) from the given side.
pub fn apply_cr<S: Scalar>(f: &CliffordField<S>, side: Side, bar: bool) -> CliffordField<S> {
    let mut out = CliffordField::zeros(f.grid);
    let s = f.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * f.grid.h));
    let t = real::<S>(if bar { -1.0 } else { 1.0 });
    f.grid.for_each_margin(1, |_, idx| {
        let d0 = (f.data[idx + s[0]] - f.data[idx - s[0]]).scale(inv2h);
        let d1 = (f.data[idx + s[1]] - f.data[idx - s[1]]).scale(inv2h).scale(t);
        let d2 = (f.data[idx + s[2]] - f.data[idx - s[2]]).scale(inv2h).scale(t);
        out.data[idx] = match side {
            Side::Left => Clifford::new(
                d0.c[0] - d1.c[1] - d2.c[2],
                d0.c[1] + d1.c[0] + d2.c[3],
                d0.c[2] - d1.c[3] + d2.c[0],
                d0.c[3] + d1.c[2] - d2.c[1],
            ),
            Side::Right => Clifford::new(
                d0.c[0] - d1.c[1] - d2.c[2],
                d0.c[1] + d1.c[0] - d2.c[3],
                d0.c[2] + d1.c[3] + d2.c[0],
                d0.c[3] - d1.c[2] + d2.c[1],
            ),
        };
    });
    out
}

pub fn apply_d_left<S: Scalar>(f: &CliffordField<S>) -> CliffordField<S> {
    apply_cr(f, Side::Left, false)
}

pub fn apply_d_bar_left<S: Scalar>(f: &CliffordField<S>) -> CliffordField<S> {
    apply_cr(f, Side::Left, true)
}

pub fn apply_d_right<S: Scalar>(f: &CliffordField<S>) -> CliffordField<S> {
    apply_cr(f, Side::Right, false)
}

pub fn apply_d_bar_right<S: Scalar>(f: &CliffordField<S>) -> CliffordField<S> {
    apply_cr(f, Side::Right, true)
}

/// The scalar differential operator `Sc(f D) = f0 d0 - f1 d1 - f2 d2`
/// applied componentwise to `g`. This is the correction term that makes the
/// product rule for `D` close.
pub fn sc_d_apply<S: Scalar>(f: &CliffordField<S>, g: &CliffordField<S>) -> Result<CliffordField<S>> {
    f.grid.check_same(&g.grid)?;
    let mut out = CliffordField::zeros(g.grid);
    let s = g.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * g.grid.h));
    g.grid.for_each_margin(1, |_, idx| {
        let d0 = (g.data[idx + s[0]] - g.data[idx - s[0]]).scale(inv2h);
        let d1 = (g.data[idx + s[1]] - g.data[idx - s[1]]).scale(inv2h);
        let d2 = (g.data[idx + s[2]] - g.data[idx - s[2]]).scale(inv2h);
        let fv = f.data[idx];
        out.data[idx] = (d0 * fv.c[0] - d1 * fv.c[1]) - d2 * fv.c[2];
    });
    out.grid = g.grid;
    Ok(out)
}

/// Residual of the product rule
/// `D(fg) = (Df) g - conj(f) (Dbar g) + 2 Sc(fD) g`
/// evaluated with central differences; O(h^2) for smooth fields, rounding
/// level when `f g` is quadratic.
pub fn leibniz_residual<S: Scalar>(
    f: &CliffordField<S>,
    g: &CliffordField<S>,
) -> Result<CliffordField<S>> {
    f.grid.check_same(&g.grid)?;
    let prod = f.zip_map(g, |a, b| a * b);
    let lhs = apply_d_left(&prod);
    let df = apply_d_left(f);
    let dbarg = apply_d_bar_left(g);
    let scd = sc_d_apply(f, g)?;
    let two = S::from_real(real::<S>(2.0));
    let mut out = CliffordField::zeros(f.grid);
    f.grid.for_each_margin(1, |_, idx| {
        let rhs = df.data[idx] * g.data[idx] - f.data[idx].conj() * dbarg.data[idx]
            + scd.data[idx] * two;
        out.data[idx] = lhs.data[idx] - rhs;
    });
    Ok(out)
}

/// Split `D conj(F)` into the gradient part of the scalar component and the
/// complementary (curl/divergence) part:
/// `G = (d0 F0, d1 F0, d2 F0, 0)`, `C = D conj(F) - G`, computed directly so
/// that for an assembled potential `F = u + U2 e1 - U1 e2 - U0 e12` the pair
/// reproduces `grad u` and `(curl U, div U)` bit for bit.
pub fn grad_curl_decompose<S: Scalar>(f: &CliffordField<S>) -> (CliffordField<S>, CliffordField<S>) {
    let mut g = CliffordField::zeros(f.grid);
    let mut c = CliffordField::zeros(f.grid);
    let s = f.grid.strides();
    let inv2h = real::<S>(1.0 / (2.0 * f.grid.h));
    f.grid.for_each_margin(1, |_, idx| {
        let d0 = (f.data[idx + s[0]] - f.data[idx - s[0]]).scale(inv2h);
        let d1 = (f.data[idx + s[1]] - f.data[idx - s[1]]).scale(inv2h);
        let d2 = (f.data[idx + s[2]] - f.data[idx - s[2]]).scale(inv2h);
        g.data[idx] = Clifford::new(d0.c[0], d1.c[0], d2.c[0], S::zero());
        c.data[idx] = Clifford::new(
            d1.c[1] + d2.c[2],
            -d0.c[1] - d2.c[3],
            -d0.c[2] + d1.c[3],
            (-d0.c[3] - d1.c[2]) + d2.c[1],
        );
    });
    (g, c)
}

/// Pack a scalar potential and a vector potential into one algebra-valued
/// field: `F = u e0 + U2 e1 - U1 e2 - U0 e12`.
pub fn assemble_f<S: Scalar>(u: &ScalarField<S>, cap_u: &VectorField3<S>) -> Result<CliffordField<S>> {
    u.grid.check_same(&cap_u.grid)?;
    let mut out = CliffordField::zeros(u.grid);
    for (o, (&uv, vv)) in out.data.iter_mut().zip(u.data.iter().zip(&cap_u.data)) {
        *o = Clifford::new(uv, vv[2], -vv[1], -vv[0]);
    }
    Ok(out)
}

/// Inverse of [`assemble_f`].
pub fn disassemble_f<S: Scalar>(f: &CliffordField<S>) -> (ScalarField<S>, VectorField3<S>) {
    let mut u = ScalarField::zeros(f.grid);
    let mut v = VectorField3::zeros(f.grid);
    for ((uo, vo), a) in u.data.iter_mut().zip(v.data.iter_mut()).zip(&f.data) {
        *uo = a.c[0];
        *vo = [-a.c[3], -a.c[2], a.c[1]];
    }
    (u, v)
}

/// Trapezoid-rule integral over the sub-box with the given margin.
/// Endpoint nodes of the sub-box get weight 1/2 per axis, so a constant 1
/// integrates to exactly the sub-box volume `((n - 1 - 2m) h)^3`.
pub fn integrate_box<S: Scalar>(f: &ScalarField<S>, margin: usize) -> S {
    let n = f.grid.n;
    let m = margin;
    if n.iter().any(|&nk| nk < 2 * m + 2) {
        return S::zero();
    }
    let d = [n[0] - 2 * m, n[1] - 2 * m, n[2] - 2 * m];
    let w = |i: usize, dk: usize| -> f64 {
        if i == 0 || i == dk - 1 {
            0.5
        } else {
            1.0
        }
    };
    let total = d[0] * d[1] * d[2];
    let sum: S = pairwise_sum_scalar_by(total, |lin| {
        let i0 = lin / (d[1] * d[2]);
        let r = lin % (d[1] * d[2]);
        let i1 = r / d[2];
        let i2 = r % d[2];
        let weight = w(i0, d[0]) * w(i1, d[1]) * w(i2, d[2]);
        f.data[f.grid.idx([i0 + m, i1 + m, i2 + m])].scale(real::<S>(weight))
    });
    sum.scale(real::<S>(f.grid.h * f.grid.h * f.grid.h))
}

/// Integral over the margin-1 interior box; for `f = 1` this is exactly
/// `((n - 3) h)^3`.
pub fn integrate_interior<S: Scalar>(f: &ScalarField<S>) -> S {
    integrate_box(f, 1)
}

/// Observed convergence order from two residuals under grid refinement by
/// `ratio` (coarse h over fine h).
pub fn order_estimate(err_coarse: f64, err_fine: f64, ratio: f64) -> f64 {
    (err_coarse / err_fine).ln() / ratio.ln()
}
