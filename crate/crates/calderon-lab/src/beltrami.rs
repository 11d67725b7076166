//! The Beltrami-type first-order system and its σ-harmonic conjugate
//! machinery.
//!
//! A conductivity σ enters through the coefficient `mu = (1 - σ)/(1 + σ)`.
//! A potential `F = u e0 + U2 e1 - U1 e2 - U0 e12` satisfies
//! `D F = mu D conj(F)` exactly when the pair (u, U) satisfies
//! `curl U = σ grad u`, `div U = 0`; both directions of that equivalence are
//! pointwise algebra on the discrete derivative components, which the tests
//! exploit.

use crate::calculus::{apply_d_bar_left, apply_d_left, curl_h, grad_h};
use crate::clifford::Clifford;
use crate::error::{Error, Result};
use crate::expfun::{zero_divisor_z, Frequency};
use crate::grid::{CliffordField, ScalarField, VectorField3};
use crate::spectral::{curl_periodic, curl_inverse_periodic, leray_project_periodic, spectral_div_rel, PaddedBox};
use crate::sums::pairwise_sum_by;
use num_complex::Complex64;

/// Positive, bounded-below conductivity on a grid. `unit_near_boundary`
/// records whether the two outermost node layers are exactly 1, which the
/// windowed spectral solves rely on.
#[derive(Clone, Debug)]
pub struct ConductivityField {
    pub sigma: ScalarField<f64>,
    pub sigma0: f64,
    pub unit_near_boundary: bool,
}

impl ConductivityField {
    pub fn new(sigma: ScalarField<f64>) -> Result<Self> {
        let mut min = f64::MAX;
        for &v in &sigma.data {
            if !v.is_finite() {
                return Err(Error::DomainViolation { what: "non-finite conductivity".into() });
            }
            min = min.min(v);
        }
        if min <= 0.0 {
            return Err(Error::DomainViolation {
                what: format!("conductivity must be positive, min = {min}"),
            });
        }
        let unit = outer_two_layers_all(&sigma, |v| v == 1.0);
        Ok(ConductivityField { sigma, sigma0: min, unit_near_boundary: unit })
    }

    pub fn constant(grid: crate::grid::Grid3D, value: f64) -> Result<Self> {
        Self::new(ScalarField::from_fn(grid, |_| value))
    }
}

fn outer_two_layers_all(f: &ScalarField<f64>, pred: impl Fn(f64) -> bool) -> bool {
    let n = f.grid.n;
    for i0 in 0..n[0] {
        for i1 in 0..n[1] {
            for i2 in 0..n[2] {
                let d = [
                    i0.min(n[0] - 1 - i0),
                    i1.min(n[1] - 1 - i1),
                    i2.min(n[2] - 1 - i2),
                ];
                if d.iter().copied().min().unwrap() < 2 && !pred(f.at([i0, i1, i2])) {
                    return false;
                }
            }
        }
    }
    true
}

/// `|mu| <= (1 - sigma0)/(1 + sigma0) < 1`.
#[derive(Clone, Debug)]
pub struct BeltramiCoefficient {
    pub mu: ScalarField<f64>,
}

pub fn sigma_to_mu(sigma: &ConductivityField) -> BeltramiCoefficient {
    BeltramiCoefficient {
        mu: sigma.sigma.map(|s| (1.0 - s) / (1.0 + s)),
    }
}

pub fn mu_to_sigma(mu: &BeltramiCoefficient) -> Result<ConductivityField> {
    let mut max_abs = 0.0f64;
    for &v in &mu.mu.data {
        max_abs = max_abs.max(v.abs());
    }
    if max_abs >= 1.0 {
        return Err(Error::DomainViolation {
            what: format!("|mu| must stay below 1, max = {max_abs}"),
        });
    }
    ConductivityField::new(mu.mu.map(|m| (1.0 - m) / (1.0 + m)))
}

/// Divergence-free projection on a padded periodic box (spectral Leray).
/// Returns `V + grad(phi)` with `Lap phi = -div V`, `phi` zero-mean; the
/// constant (mean) part of `V` is untouched.
pub fn gauge_project(v: &VectorField3<f64>) -> VectorField3<f64> {
    leray_project_periodic(v)
}

const COMPAT_TOL: f64 = 1e-6;

/// Residual bookkeeping for the conjugate construction. The spectral numbers
/// live on the padded box where the solve happens; `curl_residual_fd`
/// re-measures on the original cube with central differences and therefore
/// carries O(h^2) representation noise on top of the solve error.
#[derive(Clone, Copy, Debug)]
pub struct ConjugateReport {
    pub compat_rel: f64,
    pub curl_residual_spectral: f64,
    pub div_residual_spectral: f64,
    pub curl_residual_fd: f64,
}

/// σ-harmonic conjugate: given u with div(σ grad u) = 0, build U with
/// `curl U = σ grad u`, `div U = 0`.
///
/// The constant (collar-mean) part m of the flux is carried by the exact
/// linear potential `(1/2) m x (x - c)`; the remainder is windowed into a
/// padded periodic box and inverted spectrally, `U^ = i k x W^ / |k|^2`,
/// which lands in the divergence-free gauge by construction (the inversion
/// *is* the gauge projection composed with the vector Poisson solve).
pub fn conjugate_solve(
    sigma: &ConductivityField,
    u: &ScalarField<f64>,
) -> Result<(VectorField3<f64>, ConjugateReport)> {
    sigma.sigma.grid.check_same(&u.grid)?;
    let grad = grad_h(u);
    let mut w = VectorField3::zeros(u.grid);
    let n = u.grid.n;
    for i0 in 0..n[0] {
        for i1 in 0..n[1] {
            for i2 in 0..n[2] {
                // grad_h leaves the outermost ring zero; clamp to the nearest
                // interior node so the collar mean and the window see sane
                // values there.
                let j = [
                    i0.clamp(1, n[0] - 2),
                    i1.clamp(1, n[1] - 2),
                    i2.clamp(1, n[2] - 2),
                ];
                let g = grad.at(j);
                let s = sigma.sigma.at([i0, i1, i2]);
                w.data[w.grid.idx([i0, i1, i2])] = [s * g[0], s * g[1], s * g[2]];
            }
        }
    }
    conjugate_solve_flux(&w)
}

/// Same construction, starting from the flux `W = σ grad u` directly.
pub fn conjugate_solve_flux(
    w: &VectorField3<f64>,
) -> Result<(VectorField3<f64>, ConjugateReport)> {
    let grid = w.grid;
    let mean = collar_mean(w);
    let mut reduced = w.clone();
    for v in reduced.data.iter_mut() {
        for k in 0..3 {
            v[k] -= mean[k];
        }
    }

    let len = w.data.len();
    let wnorm = pairwise_sum_by(len, |i| (0..3).map(|k| w.data[i][k].powi(2)).sum()).sqrt();
    let rnorm =
        pairwise_sum_by(len, |i| (0..3).map(|k| reduced.data[i][k].powi(2)).sum()).sqrt();

    // Constant flux (to rounding): the linear potential carries all of it and
    // the spectral stage would only divide noise by noise.
    let (u_core, compat_rel, curl_residual_spectral, div_residual_spectral) =
        if rnorm <= 1e-12 * wnorm || wnorm == 0.0 {
            (VectorField3::zeros(grid), 0.0, 0.0, 0.0)
        } else {
            let pb = PaddedBox::for_cube(grid)?;
            let embedded = pb.embed_windowed(&reduced)?;

            let compat_rel = spectral_div_rel(&embedded);
            if compat_rel > COMPAT_TOL {
                return Err(Error::CompatibilityFailure { rel_div: compat_rel, tol: COMPAT_TOL });
            }

            let u_pad = curl_inverse_periodic(&embedded);
            let div_sp = spectral_div_rel(&u_pad);
            let curl_back = curl_periodic(&u_pad);
            let curl_sp = rel_l2_vec(&curl_back, &embedded);
            (pb.restrict(&u_pad)?, compat_rel, curl_sp, div_sp)
        };
    let c = [
        grid.origin[0] + 0.5 * (grid.n[0] - 1) as f64 * grid.h,
        grid.origin[1] + 0.5 * (grid.n[1] - 1) as f64 * grid.h,
        grid.origin[2] + 0.5 * (grid.n[2] - 1) as f64 * grid.h,
    ];
    let mut total = u_core;
    for i0 in 0..grid.n[0] {
        for i1 in 0..grid.n[1] {
            for i2 in 0..grid.n[2] {
                let x = grid.coord([i0, i1, i2]);
                let r = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
                let lin = [
                    0.5 * (mean[1] * r[2] - mean[2] * r[1]),
                    0.5 * (mean[2] * r[0] - mean[0] * r[2]),
                    0.5 * (mean[0] * r[1] - mean[1] * r[0]),
                ];
                let idx = grid.idx([i0, i1, i2]);
                for k in 0..3 {
                    total.data[idx][k] += lin[k];
                }
            }
        }
    }

    // FD residual against the *input* flux on the cube interior.
    let curl_fd = curl_h(&total);
    let mut num = Vec::new();
    let mut den = Vec::new();
    grid.for_each_margin(1, |i, idx| {
        let _ = i;
        for k in 0..3 {
            num.push((curl_fd.data[idx][k] - w.data[idx][k]).powi(2));
            den.push(w.data[idx][k].powi(2));
        }
    });
    let nn = pairwise_sum_by(num.len(), |i| num[i]).sqrt();
    let dd = pairwise_sum_by(den.len(), |i| den[i]).sqrt();
    let curl_residual_fd = if dd == 0.0 { nn } else { nn / dd };

    Ok((
        total,
        ConjugateReport {
            compat_rel,
            curl_residual_spectral,
            div_residual_spectral,
            curl_residual_fd,
        },
    ))
}

/// Mean of the field over the two outermost layers that carry derivative
/// information (index distance 1 and 2 from the cube boundary).
fn collar_mean(w: &VectorField3<f64>) -> [f64; 3] {
    let n = w.grid.n;
    let mut acc = [0.0f64; 3];
    let mut count = 0usize;
    for i0 in 1..n[0] - 1 {
        for i1 in 1..n[1] - 1 {
            for i2 in 1..n[2] - 1 {
                let d = [
                    i0.min(n[0] - 1 - i0),
                    i1.min(n[1] - 1 - i1),
                    i2.min(n[2] - 1 - i2),
                ];
                let dist = d.iter().copied().min().unwrap();
                if dist == 1 || dist == 2 {
                    let v = w.at([i0, i1, i2]);
                    for k in 0..3 {
                        acc[k] += v[k];
                    }
                    count += 1;
                }
            }
        }
    }
    if count > 0 {
        for a in acc.iter_mut() {
            *a /= count as f64;
        }
    }
    acc
}

fn rel_l2_vec(a: &VectorField3<f64>, b: &VectorField3<f64>) -> f64 {
    let len = a.data.len();
    let num = pairwise_sum_by(len, |i| {
        (0..3).map(|k| (a.data[i][k] - b.data[i][k]).powi(2)).sum()
    })
    .sqrt();
    let den = pairwise_sum_by(len, |i| (0..3).map(|k| b.data[i][k].powi(2)).sum())
        .sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Per-node norm of `D F - mu D conj(F)` on the margin-1 interior.
pub fn beltrami_residual(
    f: &CliffordField<f64>,
    mu: &BeltramiCoefficient,
) -> Result<ScalarField<f64>> {
    f.grid.check_same(&mu.mu.grid)?;
    let df = apply_d_left(f);
    let dfbar = apply_d_left(&f.conj_field());
    let mut out = ScalarField::zeros(f.grid);
    f.grid.for_each_margin(1, |_, idx| {
        let r = df.data[idx] - dfbar.data[idx] * mu.mu.data[idx];
        out.data[idx] = r.norm();
    });
    Ok(out)
}

/// Both sides of the pointwise Alessandrini integrand, from assembled
/// potentials (derivatives taken by central differences).
pub fn alessandrini_integrand_check(
    sigma1: &ConductivityField,
    sigma2: &ConductivityField,
    f1: &CliffordField<f64>,
    f2: &CliffordField<f64>,
) -> Result<(ScalarField<f64>, ScalarField<f64>)> {
    f1.grid.check_same(&f2.grid)?;
    f1.grid.check_same(&sigma1.sigma.grid)?;
    f1.grid.check_same(&sigma2.sigma.grid)?;
    let dfbar1 = apply_d_left(&f1.conj_field());
    let dfbar2 = apply_d_left(&f2.conj_field());
    let g1 = grad_h(&f1.sc_field());
    let g2 = grad_h(&f2.sc_field());
    Ok(alessandrini_from_parts(
        &sigma1.sigma,
        &sigma2.sigma,
        &dfbar1,
        &dfbar2,
        &g1,
        &g2,
    ))
}

/// Integrand comparison from prepared ingredients:
/// `lhs = (mu1 - mu2)/2 <D conj(F1), D conj(F2)>`,
/// `rhs = (sigma2 - sigma1) grad u1 . grad u2`.
pub fn alessandrini_from_parts(
    sigma1: &ScalarField<f64>,
    sigma2: &ScalarField<f64>,
    dfbar1: &CliffordField<f64>,
    dfbar2: &CliffordField<f64>,
    grad1: &VectorField3<f64>,
    grad2: &VectorField3<f64>,
) -> (ScalarField<f64>, ScalarField<f64>) {
    let grid = dfbar1.grid;
    let mut lhs = ScalarField::zeros(grid);
    let mut rhs = ScalarField::zeros(grid);
    grid.for_each_margin(1, |_, idx| {
        let s1 = sigma1.data[idx];
        let s2 = sigma2.data[idx];
        let mu1 = (1.0 - s1) / (1.0 + s1);
        let mu2 = (1.0 - s2) / (1.0 + s2);
        lhs.data[idx] = 0.5 * (mu1 - mu2) * dfbar1.data[idx].inner(&dfbar2.data[idx]);
        let g1 = grad1.data[idx];
        let g2 = grad2.data[idx];
        rhs.data[idx] = (s2 - s1) * (g1[0] * g2[0] + g1[1] * g2[1] + g1[2] * g2[2]);
    });
    (lhs, rhs)
}

/// The reduced right-hand side of the exponential-substitution identity:
/// `R(M) = -conj(Z) (Dbar M) + 2 Sc(Z D) M - mu (D conj(M)) conj(Z)
///         - 2 mu (-M0 q + i M1 zeta1 + i M2 zeta2) conj(Z)`.
///
/// For any smooth M and anisotropic zeta,
/// `D(E M) - mu D(conj(E M)) = ScE * R(M)` pointwise.
pub fn cgo_reduced_residual(
    m: &CliffordField<Complex64>,
    mu: &ScalarField<f64>,
    fr: &Frequency,
) -> Result<CliffordField<Complex64>> {
    m.grid.check_same(&mu.grid)?;
    let z = zero_divisor_z(fr)?;
    let zbar = z.conj();
    let q = fr.root();
    let i = Complex64::i();
    let dbar_m = apply_d_bar_left(m);
    let d_mbar = apply_d_left(&m.conj_field());
    let scd = sc_zd(m, fr);
    let mut out = CliffordField::zeros(m.grid);
    m.grid.for_each_margin(1, |_, idx| {
        let muv = Complex64::new(mu.data[idx], 0.0);
        let mv = m.data[idx];
        let s0 = -mv.c[0] * q + i * (mv.c[1] * fr.zeta[0] + mv.c[2] * fr.zeta[1]);
        let term1 = -(zbar * dbar_m.data[idx]);
        let term2 = scd.data[idx] * Complex64::new(2.0, 0.0);
        let term3 = -((d_mbar.data[idx] * zbar) * muv);
        let term4 = -(zbar * (s0 * muv * 2.0));
        out.data[idx] = ((term1 + term2) + term3) + term4;
    });
    Ok(out)
}

/// `Sc(Z D) M = d0 M - (i zeta1 / q) d1 M - (i zeta2 / q) d2 M`.
fn sc_zd(m: &CliffordField<Complex64>, fr: &Frequency) -> CliffordField<Complex64> {
    let grid = m.grid;
    let s = grid.strides();
    let inv2h = 1.0 / (2.0 * grid.h);
    let i = Complex64::i();
    let c1 = i * fr.zeta[0] / fr.root();
    let c2 = i * fr.zeta[1] / fr.root();
    let mut out = CliffordField::zeros(grid);
    grid.for_each_margin(1, |_, idx| {
        let d0 = (m.data[idx + s[0]] - m.data[idx - s[0]]).scale(inv2h);
        let d1 = (m.data[idx + s[1]] - m.data[idx - s[1]]).scale(inv2h);
        let d2 = (m.data[idx + s[2]] - m.data[idx - s[2]]).scale(inv2h);
        out.data[idx] = (d0 - d1 * c1) - d2 * c2;
    });
    out
}

/// Residual of the substitution identity in the grouping that isolates a
/// bare `Dbar M`: `Dbar M - [ -(mu/2) Z (D conj M) conj(Z)
///                            - 2 mu (-M0 q + i M1 zeta1 + i M2 zeta2)
///                            + Z Sc(Z D) M ]`.
/// The derivation produces `conj(Z) Dbar M` instead, and since `Z` is a zero
/// divisor the two groupings are not interchangeable, so both residuals are
/// computed and their discrepancy is reported rather than adjudicated.
pub fn cgo_isolated_residual(
    m: &CliffordField<Complex64>,
    mu: &ScalarField<f64>,
    fr: &Frequency,
) -> Result<CliffordField<Complex64>> {
    m.grid.check_same(&mu.grid)?;
    let z = zero_divisor_z(fr)?;
    let zbar = z.conj();
    let q = fr.root();
    let i = Complex64::i();
    let dbar_m = apply_d_bar_left(m);
    let d_mbar = apply_d_left(&m.conj_field());
    let scd = sc_zd(m, fr);
    let mut out = CliffordField::zeros(m.grid);
    m.grid.for_each_margin(1, |_, idx| {
        let muv = Complex64::new(mu.data[idx], 0.0);
        let mv = m.data[idx];
        let s0 = -mv.c[0] * q + i * (mv.c[1] * fr.zeta[0] + mv.c[2] * fr.zeta[1]);
        let sandwich = (z * d_mbar.data[idx]) * zbar;
        let rhs = -(sandwich * (muv * 0.5))
            - Clifford::scalar(s0 * muv * 2.0)
            + z * scd.data[idx];
        out.data[idx] = dbar_m.data[idx] - rhs;
    });
    Ok(out)
}
