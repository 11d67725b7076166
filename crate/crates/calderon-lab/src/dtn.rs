//! Finite-difference conductivity forward solver on a ball mask inside the
//! cube, plus Dirichlet-to-Neumann bilinear pairings.
//!
//! The ball is a node mask (staircase boundary, O(h) geometry error by
//! construction), the stencil is the 7-point star with harmonic-mean face
//! conductivities (an M-matrix, so the discrete maximum principle holds),
//! and pairings are face-energy sums
//! `h * sum_faces sigma_f (u_q - u_p)(psi_q - psi_p)`, which are invariant
//! under changing the interior extension of the first trace up to the CG
//! residual.

use crate::beltrami::ConductivityField;
use crate::error::{Error, Result};
use crate::grid::{Grid3D, ScalarField};
use crate::scalar::Scalar;
use crate::sums::{dot, norm2, pairwise_sum_scalar_by};
use num_complex::Complex64;

const SENT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Exterior,
    Boundary,
    Interior,
}

/// Node classification for the ball of given radius centered at the cube
/// center: inside means |x| < radius; interior means inside with all six
/// neighbors inside; boundary is inside but not interior. Every interior
/// node's 6-neighborhood stays within interior + boundary by construction.
pub struct BallMask {
    pub grid: Grid3D,
    pub radius: f64,
    class: Vec<u8>,
    interior: Vec<u32>,
    packed_of: Vec<u32>,
}

impl BallMask {
    pub fn new(grid: Grid3D, radius: f64) -> Result<BallMask> {
        if !(radius > 0.0) {
            return Err(Error::DomainViolation { what: format!("ball radius {radius}") });
        }
        let center = [
            grid.origin[0] + 0.5 * (grid.n[0] - 1) as f64 * grid.h,
            grid.origin[1] + 0.5 * (grid.n[1] - 1) as f64 * grid.h,
            grid.origin[2] + 0.5 * (grid.n[2] - 1) as f64 * grid.h,
        ];
        let len = grid.len();
        let mut inside = vec![false; len];
        for i0 in 0..grid.n[0] {
            for i1 in 0..grid.n[1] {
                for i2 in 0..grid.n[2] {
                    let x = grid.coord([i0, i1, i2]);
                    let r2 = (0..3).map(|k| (x[k] - center[k]).powi(2)).sum::<f64>();
                    inside[grid.idx([i0, i1, i2])] = r2 < radius * radius;
                }
            }
        }
        let mut class = vec![0u8; len];
        let mut interior = Vec::new();
        let mut packed_of = vec![SENT; len];
        for i0 in 0..grid.n[0] {
            for i1 in 0..grid.n[1] {
                for i2 in 0..grid.n[2] {
                    let idx = grid.idx([i0, i1, i2]);
                    if !inside[idx] {
                        continue;
                    }
                    let on_hull = i0 == 0
                        || i1 == 0
                        || i2 == 0
                        || i0 == grid.n[0] - 1
                        || i1 == grid.n[1] - 1
                        || i2 == grid.n[2] - 1;
                    let s = grid.strides();
                    let all_in = !on_hull
                        && inside[idx - s[0]]
                        && inside[idx + s[0]]
                        && inside[idx - s[1]]
                        && inside[idx + s[1]]
                        && inside[idx - s[2]]
                        && inside[idx + s[2]];
                    if all_in {
                        class[idx] = 2;
                        packed_of[idx] = interior.len() as u32;
                        interior.push(idx as u32);
                    } else {
                        class[idx] = 1;
                    }
                }
            }
        }
        if interior.is_empty() {
            return Err(Error::DomainViolation {
                what: format!("ball radius {radius} has no interior nodes at n = {}", grid.n[0]),
            });
        }
        Ok(BallMask { grid, radius, class, interior, packed_of })
    }

    pub fn classify(&self, idx: usize) -> NodeClass {
        match self.class[idx] {
            0 => NodeClass::Exterior,
            1 => NodeClass::Boundary,
            _ => NodeClass::Interior,
        }
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.class[idx] != 0
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.class[idx] == 2
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        self.class[idx] == 1
    }

    pub fn interior_count(&self) -> usize {
        self.interior.len()
    }

    pub fn interior_nodes(&self) -> &[u32] {
        &self.interior
    }
}

/// Constant-1 extension outside the support mask; the output's
/// unit_near_boundary flag comes out true whenever the support stays off the
/// cube's outer layers.
pub fn extend_conductivity(
    sigma: &ScalarField<f64>,
    support: &BallMask,
) -> Result<ConductivityField> {
    support.grid.check_same(&sigma.grid)?;
    let mut out = sigma.clone();
    for (idx, v) in out.data.iter_mut().enumerate() {
        if !support.is_inside(idx) {
            *v = 1.0;
        }
    }
    ConductivityField::new(out)
}

fn harm(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

struct PackedSystem {
    nb: Vec<[u32; 6]>,
    coeff: Vec<[f64; 6]>,
    diag: Vec<f64>,
}

fn build_system(mask: &BallMask, sigma: &ScalarField<f64>) -> PackedSystem {
    let s = mask.grid.strides();
    let offs = [
        -(s[0] as isize),
        s[0] as isize,
        -(s[1] as isize),
        s[1] as isize,
        -(s[2] as isize),
        s[2] as isize,
    ];
    let m = mask.interior.len();
    let mut nb = vec![[SENT; 6]; m];
    let mut coeff = vec![[0.0f64; 6]; m];
    let mut diag = vec![0.0f64; m];
    for (p, &flat) in mask.interior.iter().enumerate() {
        let i = flat as usize;
        let si = sigma.data[i];
        let mut d = 0.0;
        for (f, &o) in offs.iter().enumerate() {
            let j = (i as isize + o) as usize;
            let c = harm(si, sigma.data[j]);
            coeff[p][f] = c;
            d += c;
            nb[p][f] = mask.packed_of[j];
        }
        diag[p] = d;
    }
    PackedSystem { nb, coeff, diag }
}

fn build_rhs(mask: &BallMask, sys: &PackedSystem, f: &ScalarField<f64>) -> Vec<f64> {
    let s = mask.grid.strides();
    let offs = [
        -(s[0] as isize),
        s[0] as isize,
        -(s[1] as isize),
        s[1] as isize,
        -(s[2] as isize),
        s[2] as isize,
    ];
    let mut b = vec![0.0f64; mask.interior.len()];
    for (p, &flat) in mask.interior.iter().enumerate() {
        let i = flat as usize;
        for (face, &o) in offs.iter().enumerate() {
            if sys.nb[p][face] == SENT {
                let j = (i as isize + o) as usize;
                b[p] += sys.coeff[p][face] * f.data[j];
            }
        }
    }
    b
}

fn matvec(sys: &PackedSystem, x: &[f64], y: &mut [f64]) {
    for p in 0..x.len() {
        let mut acc = sys.diag[p] * x[p];
        for face in 0..6 {
            let q = sys.nb[p][face];
            if q != SENT {
                acc -= sys.coeff[p][face] * x[q as usize];
            }
        }
        y[p] = acc;
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CgStats {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn cg(
    sys: &PackedSystem,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxiter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let m = b.len();
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok((vec![0.0; m], CgStats { iterations: 0, rel_residual: 0.0 }));
    }
    let mut x = match x0 {
        Some(g) => g.to_vec(),
        None => vec![0.0; m],
    };
    let mut r = vec![0.0; m];
    matvec(sys, &x, &mut r);
    for p in 0..m {
        r[p] = b[p] - r[p];
    }
    let mut pvec = r.clone();
    let mut ap = vec![0.0; m];
    let mut rr = dot(&r, &r);
    for it in 0..maxiter {
        if rr.sqrt() <= tol * bn {
            return Ok((x, CgStats { iterations: it, rel_residual: rr.sqrt() / bn }));
        }
        matvec(sys, &pvec, &mut ap);
        let alpha = rr / dot(&pvec, &ap);
        for p in 0..m {
            x[p] += alpha * pvec[p];
            r[p] -= alpha * ap[p];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for p in 0..m {
            pvec[p] = r[p] + beta * pvec[p];
        }
        rr = rr_new;
    }
    Err(Error::NonConvergence { iters: maxiter, residual: rr.sqrt() / bn })
}

/// Dirichlet problem for div(sigma grad u) = 0 on the masked ball: boundary
/// nodes carry the trace `f`, interior nodes are CG unknowns, exterior nodes
/// come back as 0.
pub struct DirichletProblem<'a> {
    pub sigma: &'a ConductivityField,
    pub f: &'a ScalarField<f64>,
    pub mask: &'a BallMask,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(
        sigma: &'a ConductivityField,
        f: &'a ScalarField<f64>,
        mask: &'a BallMask,
    ) -> Result<Self> {
        mask.grid.check_same(&sigma.sigma.grid)?;
        mask.grid.check_same(&f.grid)?;
        for (idx, &v) in f.data.iter().enumerate() {
            if mask.is_boundary(idx) && !v.is_finite() {
                return Err(Error::DomainViolation { what: "non-finite boundary value".into() });
            }
        }
        Ok(DirichletProblem { sigma, f, mask })
    }

    pub fn solve(
        &self,
        tol: f64,
        maxiter: usize,
        warm: Option<&ScalarField<f64>>,
    ) -> Result<(ScalarField<f64>, CgStats)> {
        let sys = build_system(self.mask, &self.sigma.sigma);
        let b = build_rhs(self.mask, &sys, self.f);
        let warm_packed: Option<Vec<f64>> = warm.map(|w| {
            self.mask.interior.iter().map(|&flat| w.data[flat as usize]).collect()
        });
        let (x, stats) = cg(&sys, &b, warm_packed.as_deref(), tol, maxiter)?;
        // boundary AND exterior nodes carry the trace field, so the solution
        // is globally defined and the pairing's half-weighted crossing faces
        // read Dirichlet data
        let mut u = self.f.clone();
        for (p, &flat) in self.mask.interior.iter().enumerate() {
            u.data[flat as usize] = x[p];
        }
        Ok((u, stats))
    }
}

pub fn solve_dirichlet(
    sigma: &ConductivityField,
    f: &ScalarField<f64>,
    mask: &BallMask,
    tol: f64,
    maxiter: usize,
    warm: Option<&ScalarField<f64>>,
) -> Result<(ScalarField<f64>, CgStats)> {
    DirichletProblem::new(sigma, f, mask)?.solve(tol, maxiter, warm)
}

/// Complex traces are two real solves; iterations add up, residual is the
/// worse of the two.
pub fn solve_dirichlet_complex(
    sigma: &ConductivityField,
    f: &ScalarField<Complex64>,
    mask: &BallMask,
    tol: f64,
    maxiter: usize,
    warm: Option<&ScalarField<Complex64>>,
) -> Result<(ScalarField<Complex64>, CgStats)> {
    let fre = ScalarField { grid: f.grid, data: f.data.iter().map(|z| z.re).collect() };
    let fim = ScalarField { grid: f.grid, data: f.data.iter().map(|z| z.im).collect() };
    let wre = warm.map(|w| ScalarField {
        grid: w.grid,
        data: w.data.iter().map(|z| z.re).collect(),
    });
    let wim = warm.map(|w| ScalarField {
        grid: w.grid,
        data: w.data.iter().map(|z| z.im).collect(),
    });
    let (ure, sre) = solve_dirichlet(sigma, &fre, mask, tol, maxiter, wre.as_ref())?;
    let (uim, sim) = solve_dirichlet(sigma, &fim, mask, tol, maxiter, wim.as_ref())?;
    let u = ScalarField {
        grid: f.grid,
        data: ure
            .data
            .iter()
            .zip(&uim.data)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect(),
    };
    Ok((
        u,
        CgStats {
            iterations: sre.iterations + sim.iterations,
            rel_residual: sre.rel_residual.max(sim.rel_residual),
        },
    ))
}

/// Face-energy bilinear form `h * sum w_f sigma_f (u_q - u_p)(psi_q - psi_p)`.
/// Faces with both endpoints inside get weight 1; faces crossing the staircase
/// boundary get weight 1/2 and read trace data at the exterior endpoint (the
/// per-chord trapezoid rule, which keeps the ball volume to O(h^2)). Every face
/// touching an interior unknown has weight 1, so the value is independent of
/// the interior extension up to solver residual. Bilinear (no conjugation), so
/// complex pairings mean the weak form, not an inner product.
pub fn energy_pairing<S>(
    sigma: &ScalarField<f64>,
    mask: &BallMask,
    u: &ScalarField<S>,
    psi: &ScalarField<S>,
) -> S
where
    S: Scalar<Real = f64>,
{
    let grid = mask.grid;
    let len = grid.len();
    let s = grid.strides();
    let n = grid.n;
    let total: S = pairwise_sum_scalar_by(3 * len, |f| {
        let axis = f / len;
        let i = f % len;
        let along = match axis {
            0 => i / s[0],
            1 => (i / s[1]) % n[1],
            _ => i % n[2],
        };
        if along + 1 >= n[axis] {
            return S::zero();
        }
        let j = i + s[axis];
        let w = match (mask.is_inside(i), mask.is_inside(j)) {
            (true, true) => 1.0,
            (false, false) => return S::zero(),
            _ => 0.5,
        };
        let c = w * harm(sigma.data[i], sigma.data[j]);
        (u.data[j] - u.data[i]) * (psi.data[j] - psi.data[i]) * S::from_real(c)
    });
    total * S::from_real(grid.h)
}

#[derive(Clone, Copy, Debug)]
pub struct DtnPairing {
    pub value: f64,
    pub solver_residual: f64,
}

/// `<f1, Lambda_sigma f2>`: solve u2 for the sigma problem with trace f2,
/// extend f1 discretely harmonically (a sigma = 1 solve), pair their
/// energies. The value is independent of the f1 extension up to solver
/// residual, which is what makes this the weak-form DtN pairing.
pub fn dtn_pairing(
    sigma: &ConductivityField,
    f1: &ScalarField<f64>,
    f2: &ScalarField<f64>,
    mask: &BallMask,
    tol: f64,
    maxiter: usize,
) -> Result<DtnPairing> {
    let (u2, s2) = solve_dirichlet(sigma, f2, mask, tol, maxiter, None)?;
    let ones = ConductivityField::constant(mask.grid, 1.0)?;
    let (psi1, s1) = solve_dirichlet(&ones, f1, mask, tol, maxiter, None)?;
    Ok(DtnPairing {
        value: energy_pairing(&sigma.sigma, mask, &u2, &psi1),
        solver_residual: s1.rel_residual.max(s2.rel_residual),
    })
}

/// Difference quotient `[<f1, Lambda_{sigma + eps delta} f2> - <f1,
/// Lambda_sigma f2>]/eps`; the harmonic extension of f1 is shared between
/// both pairings, so their common discretization error cancels in the
/// difference.
pub fn dtn_difference_pairing(
    sigma: &ConductivityField,
    delta: &ScalarField<f64>,
    eps: f64,
    f1: &ScalarField<f64>,
    f2: &ScalarField<f64>,
    mask: &BallMask,
    tol: f64,
    maxiter: usize,
) -> Result<f64> {
    mask.grid.check_same(&delta.grid)?;
    if eps == 0.0 {
        return Err(Error::DomainViolation { what: "eps must be nonzero".into() });
    }
    for (idx, &d) in delta.data.iter().enumerate() {
        if d != 0.0 && !mask.is_interior(idx) {
            return Err(Error::DomainViolation {
                what: "perturbation must be supported strictly inside the ball".into(),
            });
        }
    }
    let perturbed = ScalarField {
        grid: sigma.sigma.grid,
        data: sigma
            .sigma
            .data
            .iter()
            .zip(&delta.data)
            .map(|(&s, &d)| s + eps * d)
            .collect(),
    };
    let floor = 0.5 * sigma.sigma0;
    if perturbed.data.iter().any(|&v| v < floor) {
        return Err(Error::DomainViolation {
            what: format!("perturbed conductivity dips below {floor}"),
        });
    }
    let sigma_eps = ConductivityField::new(perturbed)?;

    let ones = ConductivityField::constant(mask.grid, 1.0)?;
    let (psi1, _) = solve_dirichlet(&ones, f1, mask, tol, maxiter, None)?;
    let (u2, _) = solve_dirichlet(sigma, f2, mask, tol, maxiter, None)?;
    let (u2e, _) = solve_dirichlet(&sigma_eps, f2, mask, tol, maxiter, Some(&u2))?;
    let a_eps: f64 = energy_pairing(&sigma_eps.sigma, mask, &u2e, &psi1);
    let a_base: f64 = energy_pairing(&sigma.sigma, mask, &u2, &psi1);
    Ok((a_eps - a_base) / eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{delta_gaussian, sigma_smooth};
    use std::f64::consts::PI;

    fn mask(n: usize) -> BallMask {
        BallMask::new(Grid3D::cube(n, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn mask_classification_and_volume() {
        let m = mask(32);
        let mut counts = [0usize; 3];
        for idx in 0..m.grid.len() {
            counts[m.class[idx] as usize] += 1;
        }
        assert!(counts[1] > 0 && counts[2] > 0);
        // staircase node count approximates the ball volume
        let vol = (counts[1] + counts[2]) as f64 * m.grid.h.powi(3);
        let ball = 4.0 * PI / 3.0;
        assert!((vol - ball).abs() < 0.015 * ball, "staircase volume {vol} vs {ball}");
        // interior neighborhoods stay inside
        let s = m.grid.strides();
        for &flat in m.interior_nodes() {
            let i = flat as usize;
            for o in [s[0], s[1], s[2]] {
                assert!(m.is_inside(i + o) && m.is_inside(i - o));
            }
        }
    }

    #[test]
    fn conductivity_extension() {
        let g = Grid3D::cube(16, 1.0).unwrap();
        let support = BallMask::new(g, 0.6).unwrap();
        let ones = ScalarField::from_fn(g, |_| 1.0);
        let ext = extend_conductivity(&ones, &support).unwrap();
        assert!(ext.sigma.data.iter().all(|&v| v == 1.0));

        let two = ScalarField::from_fn(g, |_| 2.0);
        let ext2 = extend_conductivity(&two, &support).unwrap();
        assert_eq!(ext2.sigma0, 1.0);
        assert!(ext2.unit_near_boundary);
        let again = extend_conductivity(&ext2.sigma, &support).unwrap();
        assert_eq!(again.sigma.data, ext2.sigma.data);
        for idx in 0..g.len() {
            let want = if support.is_inside(idx) { 2.0 } else { 1.0 };
            assert_eq!(ext2.sigma.data[idx], want);
        }
    }

    #[test]
    fn linear_and_quadratic_traces_are_discrete_exact() {
        let m = mask(24);
        let one = ConductivityField::constant(m.grid, 1.0).unwrap();
        for field in [
            ScalarField::from_fn(m.grid, |x| x[1]),
            ScalarField::from_fn(m.grid, |x| x[0] * x[0] - x[1] * x[1]),
        ] {
            let (u, stats) = solve_dirichlet(&one, &field, &m, 1e-12, 4000, None).unwrap();
            let mut err = 0.0f64;
            for idx in 0..m.grid.len() {
                if m.is_inside(idx) {
                    err = err.max((u.data[idx] - field.data[idx]).abs());
                }
            }
            assert!(err < 1e-8, "exact-solution error {err}, stats {stats:?}");
        }
    }

    #[test]
    fn maximum_principle() {
        let m = mask(20);
        let sig = ConductivityField::new(sigma_smooth(m.grid)).unwrap();
        let f = ScalarField::from_fn(m.grid, |x| (3.0 * x[0]).sin() + 0.3 * x[1] * x[2]);
        let (u, _) = solve_dirichlet(&sig, &f, &m, 1e-11, 4000, None).unwrap();
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for idx in 0..m.grid.len() {
            if m.is_boundary(idx) {
                lo = lo.min(f.data[idx]);
                hi = hi.max(f.data[idx]);
            }
        }
        let slack = 1e-8 * (hi - lo);
        for idx in 0..m.grid.len() {
            if m.is_interior(idx) {
                assert!(u.data[idx] >= lo - slack && u.data[idx] <= hi + slack);
            }
        }
    }

    /// Two-layer sphere, sigma = 2 inside r < 1/2 and 1 outside, trace x1:
    /// separation of variables gives u = (24/31) x1 in the inner layer.
    #[test]
    fn layered_sphere_matches_separated_solution() {
        let mut errs = Vec::new();
        for n in [25usize, 49] {
            let m = mask(n);
            let sig = ConductivityField::new(ScalarField::from_fn(m.grid, |x| {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if r < 0.5 {
                    2.0
                } else {
                    1.0
                }
            }))
            .unwrap();
            let f = ScalarField::from_fn(m.grid, |x| x[1]);
            let (u, _) = solve_dirichlet(&sig, &f, &m, 1e-11, 8000, None).unwrap();
            let mut err = 0.0f64;
            for i0 in 0..n {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let x = m.grid.coord([i0, i1, i2]);
                        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                        if r2 < 0.35 * 0.35 {
                            let want = 24.0 / 31.0 * x[1];
                            err = err.max((u.at([i0, i1, i2]) - want).abs());
                        }
                    }
                }
            }
            // scale: max |(24/31) x1| over the sampled region
            errs.push(err / (24.0 / 31.0 * 0.35));
        }
        assert!(errs[1] < 0.02, "layered-sphere errors {errs:?}");
        assert!(errs[1] < 0.8 * errs[0], "no refinement improvement: {errs:?}");
    }

    #[test]
    fn pairing_volume_oracle_symmetry_and_constants() {
        let m = mask(48);
        let one = ConductivityField::constant(m.grid, 1.0).unwrap();
        let f = ScalarField::from_fn(m.grid, |x| x[1]);
        let p = dtn_pairing(&one, &f, &f, &m, 1e-10, 8000).unwrap();
        let volume = 4.0 * PI / 3.0;
        assert!(
            (p.value - volume).abs() < 0.02 * volume,
            "x1 pairing {} vs |B| {volume}",
            p.value
        );

        // constants are annihilated
        let c = ScalarField::from_fn(m.grid, |_| 3.0);
        let pc = dtn_pairing(&one, &c, &f, &m, 1e-10, 8000).unwrap();
        assert!(pc.value.abs() < 1e-8 * volume, "constant pairing {}", pc.value);

        // symmetry under trace swap for nonconstant sigma
        let m2 = mask(20);
        let sig = ConductivityField::new(sigma_smooth(m2.grid)).unwrap();
        let g1 = ScalarField::from_fn(m2.grid, |x| x[1] + 0.3 * x[0] * x[2]);
        let g2 = ScalarField::from_fn(m2.grid, |x| x[0] * x[0] - x[2] * x[2] + 0.5 * x[1]);
        let tol = 1e-11;
        let a = dtn_pairing(&sig, &g1, &g2, &m2, tol, 8000).unwrap();
        let b = dtn_pairing(&sig, &g2, &g1, &m2, tol, 8000).unwrap();
        let scale = a.value.abs().max(b.value.abs()).max(1.0);
        assert!(
            (a.value - b.value).abs() <= 1e-7 * scale,
            "asymmetry {} vs {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn energy_identity_and_extension_independence() {
        let m = mask(20);
        let sig = ConductivityField::new(sigma_smooth(m.grid)).unwrap();
        let f = ScalarField::from_fn(m.grid, |x| x[1] + 0.4 * (2.0 * x[2]).sin());
        let p = dtn_pairing(&sig, &f, &f, &m, 1e-11, 8000).unwrap();
        assert!(p.value > 0.0);
        // pairing with the sigma-solution as its own extension gives the
        // energy integral; extension-independence says they agree
        let (u, _) = solve_dirichlet(&sig, &f, &m, 1e-11, 8000, None).unwrap();
        let self_energy: f64 = energy_pairing(&sig.sigma, &m, &u, &u);
        assert!(
            (p.value - self_energy).abs() < 1e-6 * self_energy,
            "pairing {} vs energy {}",
            p.value,
            self_energy
        );
    }

    #[test]
    fn difference_pairing_linearizes() {
        let m = mask(24);
        let one = ConductivityField::constant(m.grid, 1.0).unwrap();
        let delta = interior_bump(&m);
        let f = ScalarField::from_fn(m.grid, |x| x[1]);

        let zero = ScalarField::zeros(m.grid);
        let d0 =
            dtn_difference_pairing(&one, &zero, 1e-3, &f, &f, &m, 1e-11, 8000).unwrap();
        assert_eq!(d0, 0.0);

        // oracle: d/deps <f, Lambda f> at eps=0 equals int delta |grad x1|^2
        // = int delta
        let mut oracle = 0.0;
        for idx in 0..m.grid.len() {
            oracle += delta.data[idx];
        }
        oracle *= m.grid.h.powi(3);

        let mut vals = Vec::new();
        for eps in [8e-2, 4e-2, 2e-2] {
            let v = dtn_difference_pairing(&one, &delta, eps, &f, &f, &m, 1e-12, 8000)
                .unwrap();
            vals.push(v);
        }
        for &v in &vals {
            assert!((v - oracle).abs() < 0.05 * oracle.abs(), "{v} vs oracle {oracle}");
        }
        // defect is ~linear in eps: successive differences halve
        let r = (vals[0] - vals[1]) / (vals[1] - vals[2]);
        assert!((1.4..=2.8).contains(&r), "Richardson ratio {r}, values {vals:?}");
    }

    fn interior_bump(m: &BallMask) -> ScalarField<f64> {
        let raw = delta_gaussian(m.grid);
        let mut d = ScalarField::zeros(m.grid);
        for idx in 0..m.grid.len() {
            if m.is_interior(idx) {
                d.data[idx] = raw.data[idx];
            }
        }
        d
    }
}
