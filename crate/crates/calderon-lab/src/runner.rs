//! The experiment commands behind the binary. Every command runs a fixed,
//! seeded battery, writes `report.csv` and `summary.json` into the output
//! directory, and returns whether all gated checks stayed inside their
//! tolerances. Informational rows (marked below) are reported but never
//! gate the verdict.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::beltrami::{
    alessandrini_from_parts, beltrami_residual, cgo_isolated_residual, cgo_reduced_residual,
    conjugate_solve, conjugate_solve_flux, sigma_to_mu, ConductivityField,
};
use crate::calculus::{
    apply_d_bar_left, apply_d_left, apply_d_right, assemble_f, curl_h, div_h,
    grad_curl_decompose, grad_h, laplace_wide_h, leibniz_residual, order_estimate,
};
use crate::clifford::Clifford;
use crate::config::ExperimentConfig;
use crate::dtn::{energy_pairing, solve_dirichlet, BallMask};
use crate::error::{Error, Result};
use crate::expfun::{e_field, eval_e1, eval_e2, eval_e, eval_sc_e, Frequency};
use crate::grid::{CliffordField, Grid3D, ScalarField, VectorField3};
use crate::io::{read_scalar_grid, write_scalar_grid};
use crate::recon::{
    recon_error, reconstruct, sample_spectrum_dtn, sample_spectrum_volume, used_band_truth,
    SpectrumGrid,
};
use crate::report::{write_spectrum_csv, write_summary, CheckSummary, LinreconSummary, Report};
use crate::scenario::{delta_gaussian, sigma_smooth, ManufacturedPotential};
use crate::sums::pairwise_sum_by;

const ALG_CASES: usize = 10_000;
const ALG_TOL: f64 = 1e-12;
const ORDER_LO: f64 = 1.7;
const ORDER_HI: f64 = 2.3;
const EXP_IDENTITY_TOL: f64 = 1e-10;
const MONO_RATIO_TOL: f64 = 1e-2;
const POINTWISE_TOL: f64 = 1e-12;
const RECOVERY_TOL: f64 = 1e-6;
const PAIRING_MATCH_TOL: f64 = 0.03;
const ASYM_TOL: f64 = 1e-6;
const RECON_VOLUME_TOL: f64 = 0.10;
const RECON_DTN_MARGIN: f64 = 0.15;
const RECON_DTN_ONLY_TOL: f64 = 0.25;

/// Max plus RMS of a stream of residuals; the sequential sum is fine here
/// because the visit order is fixed.
#[derive(Default)]
struct Tally {
    sumsq: f64,
    count: usize,
    max: f64,
}

impl Tally {
    fn push(&mut self, r: f64) {
        self.sumsq += r * r;
        self.count += 1;
        if r > self.max {
            self.max = r;
        }
    }

    fn rms(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sumsq / self.count as f64).sqrt()
        }
    }
}

fn finish(report: &Report, command: &str, pass: bool, out: &Path) -> Result<bool> {
    for r in &report.rows {
        let order = match r.order_estimate {
            Some(o) => format!(" order={o:.3}"),
            None => String::new(),
        };
        println!(
            "{} grid={} l2={:.6e} max={:.6e}{}",
            r.operation, r.grid, r.residual_l2, r.residual_max, order
        );
    }
    println!("{command}: {}", if pass { "PASS" } else { "FAIL" });
    report.write_csv(&out.join("report.csv"))?;
    let worst = report.rows.iter().map(|r| r.residual_max).fold(0.0f64, f64::max);
    write_summary(
        &out.join("summary.json"),
        &CheckSummary {
            command: command.into(),
            rows: report.rows.len(),
            pass,
            worst_residual: worst,
        },
    )?;
    Ok(pass)
}

fn rand_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn rand_clifford_c(rng: &mut ChaCha8Rng) -> Clifford<Complex64> {
    Clifford::new(
        rand_complex(rng, 1.0),
        rand_complex(rng, 1.0),
        rand_complex(rng, 1.0),
        rand_complex(rng, 1.0),
    )
}

fn rand_clifford_r(rng: &mut ChaCha8Rng) -> Clifford<f64> {
    Clifford::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

pub fn verify_algebra(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::default();
    let mut pass = true;
    let mut gated = |report: &mut Report, name: &str, t: &Tally| {
        pass &= t.max <= ALG_TOL;
        report.add(name, 0, 0.0, t.rms(), t.max, None);
    };

    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let (a, b, c) = (rand_clifford_c(&mut rng), rand_clifford_c(&mut rng), rand_clifford_c(&mut rng));
        let scale = (a.norm() * b.norm() * c.norm()).max(1e-300);
        t.push(((a * b) * c - a * (b * c)).norm() / scale);
    }
    gated(&mut report, "product-associativity", &t);

    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let (a, b) = (rand_clifford_c(&mut rng), rand_clifford_c(&mut rng));
        let scale = (a.norm() * b.norm()).max(1e-300);
        t.push(((a * b).conj() - b.conj() * a.conj()).norm() / scale);
    }
    gated(&mut report, "conjugation-antiautomorphism", &t);

    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let (a, b) = (rand_clifford_c(&mut rng), rand_clifford_c(&mut rng));
        let scale = (a.norm() * b.norm()).max(1e-300);
        t.push(((a * b).involute() - a.involute() * b.involute()).norm() / scale);
    }
    gated(&mut report, "grade-involution-homomorphism", &t);

    // random grade-1 pair: ab + ba = -2 (a . b)
    let zero = Complex64::new(0.0, 0.0);
    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let a = Clifford::new(zero, rand_complex(&mut rng, 1.0), rand_complex(&mut rng, 1.0), zero);
        let b = Clifford::new(zero, rand_complex(&mut rng, 1.0), rand_complex(&mut rng, 1.0), zero);
        let dot = a.c[1] * b.c[1] + a.c[2] * b.c[2];
        let scale = (a.norm() * b.norm()).max(1e-300);
        t.push((a * b + b * a + Clifford::scalar(dot * 2.0)).norm() / scale);
    }
    gated(&mut report, "vector-anticommutation", &t);

    // the finite generator table, exact
    let mut t = Tally::default();
    let e: [Clifford<f64>; 4] =
        [Clifford::basis(0), Clifford::basis(1), Clifford::basis(2), Clifford::basis(3)];
    for k in 1..4 {
        t.push((e[k] * e[k] + Clifford::one()).norm());
        t.push((e[0] * e[k] - e[k]).norm());
        t.push((e[k] * e[0] - e[k]).norm());
    }
    t.push((e[1] * e[2] - e[3]).norm());
    t.push((e[2] * e[1] + e[3]).norm());
    gated(&mut report, "generator-table", &t);

    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let (a, b) = (rand_clifford_r(&mut rng), rand_clifford_r(&mut rng));
        let scale = (a.norm() * b.norm()).max(1e-300);
        t.push(((a * b).norm() - a.norm() * b.norm()).abs() / scale);
    }
    gated(&mut report, "real-norm-multiplicativity", &t);

    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let (a, b) = (rand_clifford_c(&mut rng), rand_clifford_c(&mut rng));
        let scale = (a.norm() * a.norm() * b.norm() * b.norm()).max(1e-300);
        t.push(((a * b).quad() - a.quad() * b.quad()).norm() / scale);
    }
    gated(&mut report, "quadrance-multiplicativity", &t);

    let one = Clifford::<Complex64>::one();
    let mut t = Tally::default();
    for _ in 0..ALG_CASES {
        let a = rand_clifford_c(&mut rng);
        if let Ok(inv) = a.try_inverse() {
            let scale = 1.0 + a.norm() * inv.norm();
            t.push((a * inv - one).norm() / scale);
            t.push((inv * a - one).norm() / scale);
        }
    }
    gated(&mut report, "inverse-roundtrip", &t);

    finish(&report, "verify-algebra", pass, out)
}

/// Four sinusoids of linear forms; every component has the closed-form
/// Laplacian `-(|a_k|^2) f_k`.
const WAVE_DIRS: [[f64; 3]; 4] = [
    [1.0, 0.3, -0.6],
    [-0.4, 1.1, 0.5],
    [0.7, -0.9, 0.8],
    [0.5, 0.6, -1.2],
];
const WAVE_PHASES: [f64; 4] = [0.2, 1.3, -0.4, 0.9];

fn wave_field(g: Grid3D) -> CliffordField<f64> {
    CliffordField::from_fn(g, |x| {
        let mut c = [0.0; 4];
        for k in 0..4 {
            let a = WAVE_DIRS[k];
            c[k] = (a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + WAVE_PHASES[k]).sin();
        }
        Clifford::new(c[0], c[1], c[2], c[3])
    })
}

fn wave_laplacian(g: Grid3D) -> CliffordField<f64> {
    CliffordField::from_fn(g, |x| {
        let mut c = [0.0; 4];
        for k in 0..4 {
            let a = WAVE_DIRS[k];
            let a2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
            c[k] = -a2 * (a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + WAVE_PHASES[k]).sin();
        }
        Clifford::new(c[0], c[1], c[2], c[3])
    })
}

fn poly_trig_field(g: Grid3D) -> CliffordField<f64> {
    CliffordField::from_fn(g, |x| {
        Clifford::new(
            1.0 + 0.3 * x[0] * x[1] - 0.2 * x[2],
            (x[2] * 0.9).cos() * x[0] - 0.4 * x[1],
            (0.8 * x[1] + 0.1 * x[0]).sin(),
            0.5 * x[2] * x[2] - x[0],
        )
    })
}

/// Random non-isotropic frequency whose growth exponent over the unit cube
/// stays at or below `cap`.
fn bounded_frequency(rng: &mut ChaCha8Rng, draw: f64, cap: f64) -> Frequency {
    loop {
        let z = [rand_complex(rng, draw), rand_complex(rng, draw)];
        let fr = Frequency::new(z);
        if fr.magnitude() < 0.5 || fr.root().norm() < 0.15 * fr.magnitude() {
            continue;
        }
        let b = (fr.root().re.powi(2) + z[0].im.powi(2) + z[1].im.powi(2)).sqrt()
            * 3.0f64.sqrt();
        if b <= cap {
            return fr;
        }
        let s = cap / b;
        let fs = Frequency::new([z[0] * s, z[1] * s]);
        if !fs.is_isotropic() {
            return fs;
        }
    }
}

fn rel_field_error(a: &CliffordField<f64>, b: &CliffordField<f64>, margin: usize) -> (f64, f64) {
    let diff = a.zip_map(b, |p, q| p - q);
    (
        diff.norm_l2_margin(margin) / b.norm_l2_margin(margin),
        diff.norm_max_margin(margin) / b.norm_max_margin(margin),
    )
}

pub fn verify_operators(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::default();
    let mut pass = true;
    let grids = [32usize, 64];
    let h_ratio = (grids[1] - 1) as f64 / (grids[0] - 1) as f64;
    let order_ok = |p: f64| (ORDER_LO..=ORDER_HI).contains(&p);

    // second-order factorization against the closed-form Laplacian
    fn dd(f: &CliffordField<f64>) -> CliffordField<f64> {
        apply_d_left(&apply_d_bar_left(f))
    }
    fn db(f: &CliffordField<f64>) -> CliffordField<f64> {
        apply_d_bar_left(&apply_d_left(f))
    }
    let factorizations: [(&str, fn(&CliffordField<f64>) -> CliffordField<f64>); 2] =
        [("d-dbar-equals-laplacian", dd), ("dbar-d-equals-laplacian", db)];
    for (name, second) in factorizations {
        let mut errs = Vec::new();
        for &n in &grids {
            let g = Grid3D::cube(n, 1.0)?;
            let f = wave_field(g);
            let exact = wave_laplacian(g);
            let (l2, mx) = rel_field_error(&second(&f), &exact, 2);
            errs.push(l2);
            let ord = if n == grids[1] {
                Some(order_estimate(errs[0], errs[1], h_ratio))
            } else {
                None
            };
            if let Some(p) = ord {
                pass &= order_ok(p);
            }
            report.add(name, n, g.h, l2, mx, ord);
        }
    }

    // rounding-level agreement between the factored operator and the wide
    // second-difference stencil
    {
        let g = Grid3D::cube(grids[1], 1.0)?;
        let f = wave_field(g);
        let dd = apply_d_left(&apply_d_bar_left(&f));
        let scale = wave_laplacian(g).norm_max_margin(2);
        let mut mx = 0.0f64;
        for k in 0..4 {
            let wide = laplace_wide_h(&f.component(k));
            g.for_each_margin(2, |_, idx| {
                mx = mx.max((dd.data[idx].c[k] - wide.data[idx]).abs());
            });
        }
        let rel = mx / scale;
        pass &= rel <= 1e-10;
        report.add("wide-stencil-factorization", grids[1], g.h, rel, rel, None);
    }

    // product rule
    {
        let mut errs = Vec::new();
        for &n in &grids {
            let g = Grid3D::cube(n, 1.0)?;
            let f = wave_field(g);
            let q = poly_trig_field(g);
            let prod = f.zip_map(&q, |a, b| a * b);
            let den = apply_d_left(&prod).norm_l2_margin(1);
            let r = leibniz_residual(&f, &q)?;
            errs.push(r.norm_l2_margin(1) / den);
            let mx = r.norm_max_margin(1) / apply_d_left(&prod).norm_max_margin(1);
            let ord = if n == grids[1] {
                let p = order_estimate(errs[0], errs[1], h_ratio);
                pass &= order_ok(p);
                Some(p)
            } else {
                None
            };
            report.add("product-rule", n, g.h, *errs.last().unwrap(), mx, ord);
        }
    }

    // the split of D conj(F) must reproduce grad u and (curl U, div U)
    {
        let g = Grid3D::cube(grids[1], 1.0)?;
        let u = ScalarField::from_fn(g, |x| (x[0] + 0.4 * x[1]).sin() + 0.3 * x[2] * x[2]);
        let cap = VectorField3::from_fn(g, |x| {
            [(x[1] * x[2]).cos(), x[0] * x[0] - 0.5 * x[2], (x[0] + x[1]).sin()]
        });
        let f = assemble_f(&u, &cap)?;
        let (gp, cp) = grad_curl_decompose(&f);
        let gu = grad_h(&u);
        let cu = curl_h(&cap);
        let du = div_h(&cap);
        let mut mx = 0.0f64;
        let mut scale = 0.0f64;
        g.for_each_margin(1, |_, idx| {
            let gv = gu.data[idx];
            let want_g = Clifford::new(gv[0], gv[1], gv[2], 0.0);
            let cv = cu.data[idx];
            let want_c = Clifford::new(cv[0], cv[1], cv[2], du.data[idx]);
            mx = mx.max((gp.data[idx] - want_g).norm()).max((cp.data[idx] - want_c).norm());
            scale = scale.max(want_g.norm()).max(want_c.norm());
        });
        let rel = mx / scale;
        pass &= rel <= 1e-13;
        report.add("gradient-curl-split", grids[1], g.h, rel, rel, None);
    }

    // exponential family: left and right monogenicity at second order
    for j in 0..5 {
        let fr = bounded_frequency(&mut rng, 1.2, 6.0);
        let mut errs_l = Vec::new();
        let mut errs_r = Vec::new();
        for &n in &grids {
            let g = Grid3D::cube(n, 1.0)?;
            let e = e_field(g, &fr)?;
            let den_l2 = e.norm_l2_margin(1);
            let den_mx = e.norm_max_margin(1);
            let dl = apply_d_left(&e);
            let dr = apply_d_right(&e);
            let (ll2, lmx) = (dl.norm_l2_margin(1) / den_l2, dl.norm_max_margin(1) / den_mx);
            let (rl2, rmx) = (dr.norm_l2_margin(1) / den_l2, dr.norm_max_margin(1) / den_mx);
            errs_l.push(ll2);
            errs_r.push(rl2);
            let (ol, or_) = if n == grids[1] {
                let pl = order_estimate(errs_l[0], errs_l[1], h_ratio);
                let pr = order_estimate(errs_r[0], errs_r[1], h_ratio);
                pass &= order_ok(pl) && order_ok(pr);
                pass &= ll2 <= MONO_RATIO_TOL && rl2 <= MONO_RATIO_TOL;
                (Some(pl), Some(pr))
            } else {
                (None, None)
            };
            report.add(format!("exp-left-monogenic-{j}"), n, g.h, ll2, lmx, ol);
            report.add(format!("exp-right-monogenic-{j}"), n, g.h, rl2, rmx, or_);
        }
    }

    // pointwise algebra of the family
    let mut t_diff = Tally::default();
    let mut t_rot = Tally::default();
    let mut t_add = Tally::default();
    for _ in 0..1000 {
        let fr = bounded_frequency(&mut rng, 0.8, 4.0);
        let x = [
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        ];
        let y = [
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(-0.6..0.6),
        ];
        let e1 = eval_e1(x, &fr);
        let e2 = eval_e2(x, &fr)?;
        let ee = eval_e(x, &fr)?;
        t_diff.push(((e1 - e2) - ee).norm() / ee.norm().max(1.0));
        let factor = fr.zeta_clifford() * (Complex64::i() / fr.root()) * Complex64::new(-1.0, 0.0);
        t_rot.push((factor * e1 - e2).norm() / e2.norm().max(1.0));
        let xy = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
        let rhs = eval_e1(xy, &fr);
        t_add.push((eval_e1(x, &fr) * eval_e1(y, &fr) - rhs).norm() / rhs.norm().max(1.0));
    }
    for (name, t) in [
        ("exp-difference-identity", &t_diff),
        ("exp-rotation-identity", &t_rot),
        ("exp-addition-formula", &t_add),
    ] {
        pass &= t.max <= EXP_IDENTITY_TOL;
        report.add(name, 0, 0.0, t.rms(), t.max, None);
    }

    finish(&report, "verify-operators", pass, out)
}

pub fn conjugate(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut report = Report::default();
    let mut pass = true;
    let g = Grid3D::cube(cfg.grid_n, cfg.extent)?;

    // manufactured compact divergence-free potential, closed-form oracle
    let m = ManufacturedPotential::default();
    let w = m.flux_field(g);
    let (got, rep) = conjugate_solve_flux(&w)?;
    let want = m.u_star_field(g);
    let num = pairwise_sum_by(g.len(), |i| {
        (0..3).map(|k| (got.data[i][k] - want.data[i][k]).powi(2)).sum()
    });
    let den = pairwise_sum_by(g.len(), |i| (0..3).map(|k| want.data[i][k].powi(2)).sum());
    let rel = (num / den).sqrt();
    let mut mxd = 0.0f64;
    let mut mxw = 0.0f64;
    for i in 0..g.len() {
        for k in 0..3 {
            mxd = mxd.max((got.data[i][k] - want.data[i][k]).abs());
            mxw = mxw.max(want.data[i][k].abs());
        }
    }
    pass &= rel <= RECOVERY_TOL;
    report.add("manufactured-flux-recovery", cfg.grid_n, g.h, rel, mxd / mxw, None);
    pass &= rep.compat_rel <= 1e-6;
    report.add("flux-compatibility", cfg.grid_n, g.h, rep.compat_rel, rep.compat_rel, None);
    // the inversion reproduces only the solenoidal part, so its residual
    // bottoms out at the compatibility defect of the windowed input
    pass &= rep.curl_residual_spectral <= 1e-6;
    report.add(
        "curl-inversion-spectral",
        cfg.grid_n,
        g.h,
        rep.curl_residual_spectral,
        rep.curl_residual_spectral,
        None,
    );
    pass &= rep.div_residual_spectral <= 1e-10;
    report.add(
        "divergence-free-gauge",
        cfg.grid_n,
        g.h,
        rep.div_residual_spectral,
        rep.div_residual_spectral,
        None,
    );
    // informational: re-measured with central differences on the raw cube,
    // carries O(h^2) representation error by construction
    report.add(
        "curl-check-finite-difference",
        cfg.grid_n,
        g.h,
        rep.curl_residual_fd,
        rep.curl_residual_fd,
        None,
    );

    // harmonic coordinate: constant flux, exact linear conjugate
    {
        let one = ConductivityField::constant(g, 1.0)?;
        let u = ScalarField::from_fn(g, |x| x[1]);
        let (cap_u, _) = conjugate_solve(&one, &u)?;
        let exact = VectorField3::from_fn(g, |x| [0.5 * x[2], 0.0, -0.5 * x[0]]);
        let mut mx = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..g.len() {
            for k in 0..3 {
                mx = mx.max((cap_u.data[i][k] - exact.data[i][k]).abs());
                scale = scale.max(exact.data[i][k].abs());
            }
        }
        let rel2 = mx / scale;
        pass &= rel2 <= 1e-10;
        report.add("harmonic-coordinate-conjugate", cfg.grid_n, g.h, rel2, rel2, None);

        // the assembled pair solves the first-order system
        let f = assemble_f(&u, &cap_u)?;
        let r = beltrami_residual(&f, &sigma_to_mu(&one))?;
        let res = r.norm_max_margin(1);
        pass &= res <= 1e-10;
        report.add("conjugate-pair-beltrami-residual", cfg.grid_n, g.h, r.norm_l2_margin(1), res, None);
    }

    // pointwise equivalence: the system residual equals the scaled defect of
    // the conjugate relations, in both directions, for generic smooth data
    {
        let gs = Grid3D::cube(16, 1.0)?;
        let sigma = sigma_smooth(gs);
        let u = ScalarField::from_fn(gs, |x| (x[0] + 0.3 * x[1]).sin() + x[2] * x[2]);
        let cap = VectorField3::from_fn(gs, |x| {
            [(x[1] * x[2]).sin(), x[0] * x[0] - x[2], (x[0] + x[1]).cos()]
        });
        let f = assemble_f(&u, &cap)?;
        let cf = ConductivityField::new(sigma.clone())?;
        let r = beltrami_residual(&f, &sigma_to_mu(&cf))?;
        let gu = grad_h(&u);
        let cu = curl_h(&cap);
        let du = div_h(&cap);
        let mut t = Tally::default();
        gs.for_each_margin(1, |_, idx| {
            let s = sigma.data[idx];
            let d = [
                s * gu.data[idx][0] - cu.data[idx][0],
                s * gu.data[idx][1] - cu.data[idx][1],
                s * gu.data[idx][2] - cu.data[idx][2],
                du.data[idx],
            ];
            let defect =
                (2.0 / (1.0 + s)) * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt();
            t.push((r.data[idx] - defect).abs() / (1.0 + defect));
        });
        pass &= t.max <= POINTWISE_TOL;
        report.add("equivalence-scaled-defect", 16, gs.h, t.rms(), t.max, None);
    }

    finish(&report, "conjugate", pass, out)
}

fn random_wave(rng: &mut ChaCha8Rng, amp: f64) -> impl Fn([f64; 3]) -> f64 {
    let k = [
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    ];
    let p = rng.gen_range(0.0..6.283);
    move |x: [f64; 3]| amp * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + p).sin()
}

fn random_wave_gradient(rng: &mut ChaCha8Rng) -> impl Fn([f64; 3]) -> [f64; 3] {
    let k = [
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    ];
    let p = rng.gen_range(0.0..6.283);
    move |x: [f64; 3]| {
        let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + p).cos();
        [k[0] * c, k[1] * c, k[2] * c]
    }
}

pub fn alessandrini(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::default();
    let mut pass = true;

    // pointwise integrand identity on random smooth data
    {
        let gs = Grid3D::cube(16, 1.0)?;
        let mut t = Tally::default();
        for _ in 0..3 {
            let (w1, w2) = (random_wave(&mut rng, 0.5), random_wave(&mut rng, 0.3));
            let s1 = ScalarField::from_fn(gs, |x| 1.2 + w1(x));
            let s2 = ScalarField::from_fn(gs, |x| 0.9 + w2(x));
            // gradients of random plane waves, in closed form
            let (gf1, gf2) = (random_wave_gradient(&mut rng), random_wave_gradient(&mut rng));
            let grad1 = VectorField3::from_fn(gs, &gf1);
            let grad2 = VectorField3::from_fn(gs, &gf2);
            let build = |sf: &ScalarField<f64>, gv: &VectorField3<f64>| {
                let mut outf = CliffordField::zeros(gs);
                for i in 0..gs.len() {
                    let gvv = gv.data[i];
                    outf.data[i] =
                        Clifford::new(gvv[0], gvv[1], gvv[2], 0.0) * (1.0 + sf.data[i]);
                }
                outf
            };
            let dfbar1 = build(&s1, &grad1);
            let dfbar2 = build(&s2, &grad2);
            let (lhs, rhs) = alessandrini_from_parts(&s1, &s2, &dfbar1, &dfbar2, &grad1, &grad2);
            gs.for_each_margin(1, |_, idx| {
                t.push((lhs.data[idx] - rhs.data[idx]).abs() / (1.0 + rhs.data[idx].abs()));
            });
        }
        pass &= t.max <= POINTWISE_TOL;
        report.add("integrand-pointwise-identity", 16, gs.h, t.rms(), t.max, None);
    }

    // trace pairings on the ball: two conductivities, direct difference
    let g = Grid3D::cube(cfg.grid_n, cfg.extent)?;
    let mask = BallMask::new(g, cfg.ball_radius)?;
    let ones = ConductivityField::constant(g, 1.0)?;
    let s2 = ConductivityField::new(sigma_smooth(g))?;
    let f1 = ScalarField::from_fn(g, |x| x[0]);
    let f2 = ScalarField::from_fn(g, |x| x[1] + 0.4 * x[0]);
    let (u1_1, _) = solve_dirichlet(&ones, &f1, &mask, cfg.cg_tol, cfg.cg_maxiter, None)?;
    let (u1_2, _) = solve_dirichlet(&s2, &f1, &mask, cfg.cg_tol, cfg.cg_maxiter, Some(&u1_1))?;
    let (u2_1, _) = solve_dirichlet(&ones, &f2, &mask, cfg.cg_tol, cfg.cg_maxiter, None)?;
    let (u2_2, _) = solve_dirichlet(&s2, &f2, &mask, cfg.cg_tol, cfg.cg_maxiter, Some(&u2_1))?;

    // the pairing is symmetric up to solver residual
    {
        let a: f64 = energy_pairing(&s2.sigma, &mask, &u2_2, &u1_1);
        let b: f64 = energy_pairing(&s2.sigma, &mask, &u1_2, &u2_1);
        let rel = (a - b).abs() / a.abs().max(b.abs());
        pass &= rel <= 1e-6;
        report.add("trace-pairing-symmetry", cfg.grid_n, g.h, rel, rel, None);
    }

    // and independent of which extension of the trace pairs it
    {
        let a: f64 = energy_pairing(&s2.sigma, &mask, &u2_2, &u1_1);
        let b: f64 = energy_pairing(&s2.sigma, &mask, &u2_2, &f1);
        let rel = (a - b).abs() / a.abs().max(b.abs());
        pass &= rel <= 1e-6;
        report.add("extension-independence", cfg.grid_n, g.h, rel, rel, None);
    }

    // direct difference of the two boundary maps against the interior
    // integral of (sigma1 - sigma2) grad u1 . grad u2
    {
        let d: f64 = energy_pairing(&ones.sigma, &mask, &u1_1, &u2_1)
            - energy_pairing(&s2.sigma, &mask, &u1_2, &u2_1);
        let gu1 = grad_h(&u1_1);
        let gu2 = grad_h(&u2_2);
        let vol = g.h.powi(3)
            * pairwise_sum_by(g.len(), |i| {
                let ds = 1.0 - s2.sigma.data[i];
                if ds == 0.0 {
                    0.0
                } else {
                    let a = gu1.data[i];
                    let b = gu2.data[i];
                    ds * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
                }
            });
        let rel = (d - vol).abs() / vol.abs();
        pass &= rel <= PAIRING_MATCH_TOL;
        report.add("pairing-vs-volume-integral", cfg.grid_n, g.h, rel, rel, None);
    }

    finish(&report, "alessandrini", pass, out)
}

type PolyCoefs = [[Complex64; 10]; 4];

fn random_poly_coefs(rng: &mut ChaCha8Rng) -> PolyCoefs {
    let mut coef = [[Complex64::new(0.0, 0.0); 10]; 4];
    for row in coef.iter_mut() {
        for c in row.iter_mut() {
            *c = rand_complex(rng, 0.5);
        }
    }
    coef[0][0] += Complex64::new(1.0, 0.0);
    coef
}

fn poly_field(g: Grid3D, coef: &PolyCoefs) -> CliffordField<Complex64> {
    let coef = *coef;
    CliffordField::from_fn(g, move |x| {
        let basis = [
            1.0,
            x[0],
            x[1],
            x[2],
            x[0] * x[1],
            x[0] * x[2],
            x[1] * x[2],
            x[0] * x[0],
            x[1] * x[1],
            x[2] * x[2],
        ];
        let mut c = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            for (t, &b) in basis.iter().enumerate() {
                c[k] += coef[k][t] * b;
            }
        }
        Clifford::new(c[0], c[1], c[2], c[3])
    })
}

pub fn cgo_residual(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = Report::default();
    let mut pass = true;
    let grids = [13usize, 25];
    let h_ratio = (grids[1] - 1) as f64 / (grids[0] - 1) as f64;

    for j in 0..5 {
        let fr = bounded_frequency(&mut rng, 1.2, 5.0);
        let muv = rng.gen_range(-0.5..0.5);
        let coef = random_poly_coefs(&mut rng);
        let mut errs = Vec::new();
        for &n in &grids {
            let g = Grid3D::cube(n, 1.0)?;
            let mu = ScalarField::from_fn(g, |_| muv);
            let m = poly_field(g, &coef);
            let e = e_field(g, &fr)?;
            let em = e.zip_map(&m, |a, b| a * b);
            let d_em = apply_d_left(&em);
            let d_embar = apply_d_left(&em.conj_field());
            let r = cgo_reduced_residual(&m, &mu, &fr)?;
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            let mut mx = 0.0f64;
            let mut mxden = 0.0f64;
            g.for_each_margin(1, |i, idx| {
                let sce = eval_sc_e(g.coord(i), &fr);
                let lhs = d_em.data[idx] - d_embar.data[idx] * Complex64::new(muv, 0.0);
                let rhs = r.data[idx] * sce;
                let dn = (lhs - rhs).norm();
                num += dn * dn;
                den += rhs.norm().powi(2);
                mx = mx.max(dn);
                mxden = mxden.max(rhs.norm());
            });
            errs.push((num / den).sqrt());
            let ord = if n == grids[1] {
                let p = order_estimate(errs[0], errs[1], h_ratio);
                pass &= (ORDER_LO..=ORDER_HI).contains(&p);
                Some(p)
            } else {
                None
            };
            report.add(
                format!("substitution-identity-m{j}"),
                n,
                g.h,
                *errs.last().unwrap(),
                mx / mxden,
                ord,
            );
        }

        // informational: distance between the two published groupings of the
        // reduced right-hand side, reported, never gated
        {
            let n = grids[1];
            let g = Grid3D::cube(n, 1.0)?;
            let mu = ScalarField::from_fn(g, |_| muv);
            let m = poly_field(g, &coef);
            let rr = cgo_reduced_residual(&m, &mu, &fr)?;
            let rp = cgo_isolated_residual(&m, &mu, &fr)?;
            let diff = rp.zip_map(&rr, |a, b| a - b);
            let den = rr.norm_l2_margin(1).max(1e-300);
            report.add(
                format!("form-discrepancy-m{j}"),
                n,
                g.h,
                diff.norm_l2_margin(1) / den,
                diff.norm_max_margin(1) / rr.norm_max_margin(1).max(1e-300),
                None,
            );
        }
    }

    finish(&report, "cgo-residual", pass, out)
}

fn assess_route(
    delta: &ScalarField<f64>,
    out: &Path,
    sg: &SpectrumGrid,
    rec: &ScalarField<f64>,
    truth: &mut Option<ScalarField<f64>>,
) -> Result<(f64, f64)> {
    if truth.is_none() {
        let t = used_band_truth(delta, sg)?;
        write_scalar_grid(&out.join("truth_bandlimited.grid"), &t)?;
        *truth = Some(t);
    }
    let t = truth.as_ref().expect("filled above");
    let tmax = t.data.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    let e = recon_error(delta, rec, sg)?;
    let emax = rec
        .data
        .iter()
        .zip(&t.data)
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()))
        / tmax;
    Ok((e, emax))
}

pub fn linrecon(cfg: &ExperimentConfig, out: &Path) -> Result<bool> {
    let g = Grid3D::cube(cfg.grid_n, cfg.extent)?;
    let delta = match cfg.scenario.as_str() {
        "gaussian" => delta_gaussian(g),
        path => {
            let f = read_scalar_grid(Path::new(path))?;
            f.grid.check_same(&g).map_err(|_| {
                Error::Config(format!(
                    "scenario grid {:?} does not match the run grid {:?}",
                    f.grid.n, g.n
                ))
            })?;
            f
        }
    };
    write_scalar_grid(&out.join("delta_true.grid"), &delta)?;

    let mut report = Report::default();
    let mut err_volume = None;
    let mut err_dtn = None;
    let mut dropped = 0usize;
    // projection of delta onto the modes the sweeps invert; the drop set is
    // fixed by (K, L, exp_cap), so both routes share one target
    let mut truth: Option<ScalarField<f64>> = None;
    let run_volume = cfg.route == "volume" || cfg.route == "both";
    let run_dtn = cfg.route == "dtn" || cfg.route == "both";

    if run_volume {
        let mut sg = sample_spectrum_volume(&delta, cfg.k_cut, cfg.period, cfg.exp_cap)?;
        write_spectrum_csv(&out.join("spectrum_volume.csv"), &sg, "volume")?;
        dropped = sg.dropped_count();
        let asym = sg.asymmetry();
        let rec = reconstruct(&mut sg, g, ASYM_TOL)?;
        write_scalar_grid(&out.join("recon_volume.grid"), &rec)?;
        let (e, emax) = assess_route(&delta, out, &sg, &rec, &mut truth)?;
        report.add("volume-route-reconstruction", cfg.grid_n, g.h, e, emax, None);
        report.add("volume-spectrum-asymmetry", cfg.grid_n, g.h, asym, asym, None);
        err_volume = Some(e);
    }
    if run_dtn {
        let mask = BallMask::new(g, cfg.ball_radius)?;
        let mut sg = sample_spectrum_dtn(
            &delta,
            cfg.k_cut,
            cfg.period,
            cfg.exp_cap,
            cfg.epsilon,
            &mask,
            cfg.cg_tol,
            cfg.cg_maxiter,
        )?;
        write_spectrum_csv(&out.join("spectrum_dtn.csv"), &sg, "dtn")?;
        dropped = sg.dropped_count();
        let asym = sg.asymmetry();
        let rec = reconstruct(&mut sg, g, ASYM_TOL)?;
        write_scalar_grid(&out.join("recon_dtn.grid"), &rec)?;
        let (e, emax) = assess_route(&delta, out, &sg, &rec, &mut truth)?;
        report.add("dtn-route-reconstruction", cfg.grid_n, g.h, e, emax, None);
        report.add("dtn-spectrum-asymmetry", cfg.grid_n, g.h, asym, asym, None);
        err_dtn = Some(e);
    }

    let pass = match (err_volume, err_dtn) {
        (Some(v), Some(d)) => v <= RECON_VOLUME_TOL && d <= v + RECON_DTN_MARGIN,
        (Some(v), None) => v <= RECON_VOLUME_TOL,
        (None, Some(d)) => d <= RECON_DTN_ONLY_TOL,
        (None, None) => false,
    };

    for r in &report.rows {
        println!(
            "{} grid={} l2={:.6e} max={:.6e}",
            r.operation, r.grid, r.residual_l2, r.residual_max
        );
    }
    println!("linrecon: {}", if pass { "PASS" } else { "FAIL" });
    report.write_csv(&out.join("report.csv"))?;
    write_summary(
        &out.join("summary.json"),
        &LinreconSummary {
            k_cut: cfg.k_cut,
            period: cfg.period,
            eps: cfg.epsilon,
            error_l2_rel: err_dtn.or(err_volume).unwrap_or(f64::INFINITY),
            dropped_k_count: dropped,
            error_volume: err_volume,
            error_dtn: err_dtn,
        },
    )?;
    Ok(pass)
}
