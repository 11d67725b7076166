//! Probe-pair reconstruction of a conductivity perturbation from linearized
//! boundary data.
//!
//! For each wavevector k a pair of harmonic scalar exponentials u1, u2 is
//! built on forced-branch frequencies so that
//!
//!   grad u1 . grad u2 = prefactor * e^{i x . kappa},   prefactor = -|k|^2 / 2.
//!
//! Pairing a perturbation delta against the probe gradients therefore reads
//! off one Fourier sample of delta, either as a volume integral or as a
//! linearized difference of trace pairings. Sweeping a lattice of wavevectors
//! and inverting the truncated series gives the band-limited perturbation.

use crate::beltrami::ConductivityField;
use crate::dtn::{energy_pairing, solve_dirichlet_complex, BallMask};
use crate::error::{Error, Result};
use crate::expfun::{eval_sc_e, Frequency};
use crate::grid::{Grid3D, ScalarField};
use crate::sums::pairwise_sum_scalar_by;
use num_complex::Complex64;
use std::f64::consts::PI;

const PERMS: [[usize; 3]; 3] = [[0, 1, 2], [1, 2, 0], [2, 0, 1]];

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Probe pair for one wavevector. All components live in the permuted frame:
/// `axis_perm[j]` is the original axis playing role `j`, where role 0 is the
/// growth axis and roles 1, 2 carry the lateral frequencies. The lateral
/// pairs split k as a + b = (k1, k2) with forced branch norms summing to
/// i k3, which is what makes the product of the two exponentials a plane
/// wave.
#[derive(Clone, Copy, Debug)]
pub struct ProbeParams {
    pub k: [f64; 3],
    pub a: [Complex64; 2],
    pub b: [Complex64; 2],
    pub norm_a: Complex64,
    pub norm_b: Complex64,
    pub axis_perm: [usize; 3],
}

impl ProbeParams {
    /// `norm_a norm_b - a.b`, always `-|k|^2 / 2`.
    pub fn prefactor(&self) -> Complex64 {
        self.norm_a * self.norm_b - (self.a[0] * self.b[0] + self.a[1] * self.b[1])
    }

    /// The plane-wave vector: `u1 u2 = e^{i x . kappa}` in original
    /// coordinates. The growth axis picks up -k3, the lateral axes k1, k2.
    pub fn kappa(&self) -> [f64; 3] {
        let mut kp = [0.0; 3];
        kp[self.axis_perm[0]] = -self.k[2];
        kp[self.axis_perm[1]] = self.k[0];
        kp[self.axis_perm[2]] = self.k[1];
        kp
    }

    /// Bound on |log|u1 u2|| over the unit ball. The norms here are purely
    /// imaginary, so only the imaginary parts of the lateral frequencies
    /// drive growth.
    pub fn growth_bound(&self) -> f64 {
        let g = |nrm: Complex64, z: &[Complex64; 2]| {
            (nrm.re * nrm.re + z[0].im * z[0].im + z[1].im * z[1].im).sqrt()
        };
        g(self.norm_a, &self.a) + g(self.norm_b, &self.b)
    }

    /// Forced-branch frequencies of the two factors.
    pub fn frequencies(&self) -> (Frequency, Frequency) {
        let fa = Frequency::with_root(self.a, self.norm_a);
        let fb = Frequency::with_root(self.b, self.norm_b);
        (
            fa.expect("norm_a is a root of a.a by construction"),
            fb.expect("norm_b is a root of b.b by construction"),
        )
    }

    fn permute(&self, x: [f64; 3]) -> [f64; 3] {
        [x[self.axis_perm[0]], x[self.axis_perm[1]], x[self.axis_perm[2]]]
    }
}

/// Split the wavevector `k` into the lateral pairs a, b. Generic branch:
/// lambda = |k|^2 / (2 (k1 + i k2)), b = (lambda, i lambda) is isotropic
/// (norm 0) and a = (k1, k2) - b carries norm i k3. When the lateral part
/// vanishes the growth component is split evenly instead.
pub fn probe_params(k: [f64; 3], axis_perm: [usize; 3]) -> Result<ProbeParams> {
    let mut sorted = axis_perm;
    sorted.sort_unstable();
    if sorted != [0, 1, 2] {
        return Err(Error::DomainViolation {
            what: format!("axis_perm {axis_perm:?} is not a permutation of 0..3"),
        });
    }
    let nrm2 = k.iter().map(|v| v * v).sum::<f64>();
    if nrm2 == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    let i = Complex64::i();
    let (a, b, norm_a, norm_b) = if k[0] == 0.0 && k[1] == 0.0 {
        let half = i * (k[2] / 2.0);
        ([czero(), half], [czero(), -half], half, half)
    } else {
        let lam = Complex64::new(nrm2 / 2.0, 0.0) / Complex64::new(k[0], k[1]);
        let b = [lam, i * lam];
        let a = [k[0] - b[0], k[1] - b[1]];
        (a, b, i * k[2], czero())
    };
    Ok(ProbeParams { k, a, b, norm_a, norm_b, axis_perm })
}

/// Probe for the Fourier mode at `kappa`, choosing whichever cyclic axis
/// assignment grows slowest. Modes whose best growth bound still exceeds
/// `exp_cap` are refused; the error carries the bound so sweeps can report
/// dropped modes.
pub fn mode_to_probe(kappa: [f64; 3], exp_cap: f64) -> Result<ProbeParams> {
    let mut best: Option<ProbeParams> = None;
    for perm in PERMS {
        let k = [kappa[perm[1]], kappa[perm[2]], -kappa[perm[0]]];
        let p = probe_params(k, perm)?;
        if best.as_ref().map_or(true, |q| p.growth_bound() < q.growth_bound()) {
            best = Some(p);
        }
    }
    let p = best.expect("three candidates");
    if p.growth_bound() > exp_cap {
        return Err(Error::Overflow { exponent: p.growth_bound(), cap: exp_cap });
    }
    Ok(p)
}

/// The two scalar probe fields on the full grid, plus the largest modulus
/// seen (growth diagnostic). Exterior values matter: the trace pairing reads
/// data at the exterior endpoint of staircase crossing faces.
pub fn probe_traces(
    p: &ProbeParams,
    grid: Grid3D,
    exp_cap: f64,
) -> Result<(ScalarField<Complex64>, ScalarField<Complex64>, f64)> {
    let bound = p.growth_bound();
    if bound > exp_cap {
        return Err(Error::Overflow { exponent: bound, cap: exp_cap });
    }
    let (fa, fb) = p.frequencies();
    let f1 = ScalarField::from_fn(grid, |x| eval_sc_e(p.permute(x), &fa));
    let f2 = ScalarField::from_fn(grid, |x| eval_sc_e(p.permute(x), &fb));
    let mut peak = 0.0f64;
    for (v, w) in f1.data.iter().zip(&f2.data) {
        peak = peak.max(v.norm()).max(w.norm());
    }
    Ok((f1, f2, peak))
}

/// `integral of delta * grad u1 . grad u2` with the analytic gradients
/// `grad u_j = u_j (-norm, i z1, i z2)` in the permuted frame; equals
/// `prefactor * delta_hat(kappa)` where `delta_hat(kappa) = integral of
/// delta e^{i x . kappa}`.
pub fn fourier_sample_volume(delta: &ScalarField<f64>, p: &ProbeParams) -> Complex64 {
    let (fa, fb) = p.frequencies();
    let i = Complex64::i();
    let ga = [-p.norm_a, i * p.a[0], i * p.a[1]];
    let gb = [-p.norm_b, i * p.b[0], i * p.b[1]];
    let grid = delta.grid;
    let n = grid.n;
    let total: Complex64 = pairwise_sum_scalar_by(grid.len(), |idx| {
        let d = delta.data[idx];
        if d == 0.0 {
            return czero();
        }
        let i2 = idx % n[2];
        let i1 = (idx / n[2]) % n[1];
        let i0 = idx / (n[1] * n[2]);
        let y = p.permute(grid.coord([i0, i1, i2]));
        let u1 = eval_sc_e(y, &fa);
        let u2 = eval_sc_e(y, &fb);
        let g1 = [ga[0] * u1, ga[1] * u1, ga[2] * u1];
        let g2 = [gb[0] * u2, gb[1] * u2, gb[2] * u2];
        (g1[0] * g2[0] + g1[1] * g2[1] + g1[2] * g2[2]) * d
    });
    total * grid.h.powi(3)
}

/// The same Fourier sample from linearized boundary data: the difference of
/// trace pairings at conductivity 1 and 1 + eps*delta, divided by eps. The
/// first trace is paired through its analytic probe field, which is a valid
/// extension (the pairing is independent of interior extension values up to
/// solver residual); the base solve warm starts from the analytic field and
/// the perturbed solve from the base solution.
pub fn fourier_sample_dtn(
    delta: &ScalarField<f64>,
    eps: f64,
    p: &ProbeParams,
    mask: &BallMask,
    exp_cap: f64,
    tol: f64,
    maxiter: usize,
) -> Result<Complex64> {
    let grid = mask.grid;
    grid.check_same(&delta.grid)?;
    if !(eps > 0.0) {
        return Err(Error::DomainViolation { what: format!("eps = {eps} must be positive") });
    }
    for idx in 0..grid.len() {
        if delta.data[idx] != 0.0 && !mask.is_interior(idx) {
            return Err(Error::MaskMismatch {
                what: "perturbation must vanish off the interior nodes".into(),
            });
        }
    }
    let (f1, f2, _peak) = probe_traces(p, grid, exp_cap)?;
    let one = ConductivityField::constant(grid, 1.0)?;
    let mut pert = delta.clone();
    for v in pert.data.iter_mut() {
        *v = 1.0 + eps * *v;
    }
    let pert = ConductivityField::new(pert)?;
    if pert.sigma0 < 0.5 {
        return Err(Error::DomainViolation {
            what: format!("perturbed conductivity dips to {}", pert.sigma0),
        });
    }
    let (u2, _) = solve_dirichlet_complex(&one, &f2, mask, tol, maxiter, Some(&f2))?;
    let (u2e, _) = solve_dirichlet_complex(&pert, &f2, mask, tol, maxiter, Some(&u2))?;
    let base = energy_pairing(&one.sigma, mask, &u2, &f1);
    let bumped = energy_pairing(&pert.sigma, mask, &u2e, &f1);
    Ok((bumped - base) / eps)
}

/// How a lattice entry was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeStatus {
    Sampled,
    /// Probe growth beyond the cap; entry left at zero.
    DroppedCap,
    /// k = 0 is unreachable by probes (prefactor 0); filled by averaging the
    /// six nearest samples during inversion.
    DcFilled,
}

/// Fourier samples on the cubic lattice (2pi/period) * {-k_cut..k_cut}^3,
/// stored densely with per-mode provenance and the probe growth bound
/// (`cond`, the conditioning diagnostic).
#[derive(Clone, Debug)]
pub struct SpectrumGrid {
    pub k_cut: i32,
    pub period: f64,
    pub data: Vec<Complex64>,
    pub status: Vec<ModeStatus>,
    pub cond: Vec<f64>,
}

impl SpectrumGrid {
    pub fn new(k_cut: i32, period: f64) -> Result<Self> {
        if k_cut < 1 {
            return Err(Error::Config(format!("spectrum cutoff K = {k_cut} must be >= 1")));
        }
        if !(period > 0.0) {
            return Err(Error::Config(format!("period L = {period} must be positive")));
        }
        let len = ((2 * k_cut + 1) as usize).pow(3);
        Ok(SpectrumGrid {
            k_cut,
            period,
            data: vec![czero(); len],
            status: vec![ModeStatus::Sampled; len],
            cond: vec![0.0; len],
        })
    }

    pub fn side(&self) -> usize {
        (2 * self.k_cut + 1) as usize
    }

    pub fn idx(&self, m: [i32; 3]) -> usize {
        let side = self.side();
        let o = |v: i32| {
            debug_assert!(v.abs() <= self.k_cut);
            (v + self.k_cut) as usize
        };
        (o(m[0]) * side + o(m[1])) * side + o(m[2])
    }

    pub fn mode_of(&self, flat: usize) -> [i32; 3] {
        let side = self.side();
        let m2 = (flat % side) as i32 - self.k_cut;
        let m1 = ((flat / side) % side) as i32 - self.k_cut;
        let m0 = (flat / (side * side)) as i32 - self.k_cut;
        [m0, m1, m2]
    }

    pub fn kappa_of(&self, m: [i32; 3]) -> [f64; 3] {
        let f = 2.0 * PI / self.period;
        [f * m[0] as f64, f * m[1] as f64, f * m[2] as f64]
    }

    pub fn dropped_count(&self) -> usize {
        self.status.iter().filter(|s| **s == ModeStatus::DroppedCap).count()
    }

    /// Worst relative defect of delta_hat(-kappa) = conj(delta_hat(kappa)).
    pub fn asymmetry(&self) -> f64 {
        let scale = self.data.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
        let mut worst = 0.0f64;
        for flat in 0..self.data.len() {
            let m = self.mode_of(flat);
            let j = self.idx([-m[0], -m[1], -m[2]]);
            worst = worst.max((self.data[flat] - self.data[j].conj()).norm());
        }
        worst / scale
    }

    fn symmetrize(&mut self) {
        let mut out = self.data.clone();
        for flat in 0..self.data.len() {
            let m = self.mode_of(flat);
            let j = self.idx([-m[0], -m[1], -m[2]]);
            out[flat] = (self.data[flat] + self.data[j].conj()) * 0.5;
        }
        self.data = out;
    }

    fn fill_dc(&mut self) {
        let dc = self.idx([0, 0, 0]);
        if self.status[dc] != ModeStatus::DcFilled {
            return;
        }
        let mut acc = czero();
        for m in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
            acc += self.data[self.idx(m)];
        }
        self.data[dc] = acc / 6.0;
    }
}

fn positive_half(m: [i32; 3]) -> bool {
    m[0] > 0 || (m[0] == 0 && (m[1] > 0 || (m[1] == 0 && m[2] > 0)))
}

fn set_pair(sg: &mut SpectrumGrid, m: [i32; 3], v: Complex64, st: ModeStatus, cond: f64) {
    let i = sg.idx(m);
    let j = sg.idx([-m[0], -m[1], -m[2]]);
    sg.data[i] = v;
    sg.data[j] = v.conj();
    sg.status[i] = st;
    sg.status[j] = st;
    sg.cond[i] = cond;
    sg.cond[j] = cond;
}

/// Sweep the half lattice with volume-integral samples, mirroring -k by
/// conjugation (delta is real). Over-cap modes are recorded as dropped with
/// their growth bound; k = 0 is flagged for the DC fill.
pub fn sample_spectrum_volume(
    delta: &ScalarField<f64>,
    k_cut: i32,
    period: f64,
    exp_cap: f64,
) -> Result<SpectrumGrid> {
    let mut sg = SpectrumGrid::new(k_cut, period)?;
    for flat in 0..sg.data.len() {
        let m = sg.mode_of(flat);
        if !positive_half(m) {
            continue;
        }
        match mode_to_probe(sg.kappa_of(m), exp_cap) {
            Ok(p) => {
                let v = fourier_sample_volume(delta, &p) / p.prefactor();
                set_pair(&mut sg, m, v, ModeStatus::Sampled, p.growth_bound());
            }
            Err(Error::Overflow { exponent, .. }) => {
                set_pair(&mut sg, m, czero(), ModeStatus::DroppedCap, exponent);
            }
            Err(e) => return Err(e),
        }
    }
    let dc = sg.idx([0, 0, 0]);
    sg.status[dc] = ModeStatus::DcFilled;
    Ok(sg)
}

/// As `sample_spectrum_volume`, with every sample produced from linearized
/// trace-pairing differences. Solver failures carry the offending mode.
pub fn sample_spectrum_dtn(
    delta: &ScalarField<f64>,
    k_cut: i32,
    period: f64,
    exp_cap: f64,
    eps: f64,
    mask: &BallMask,
    tol: f64,
    maxiter: usize,
) -> Result<SpectrumGrid> {
    let mut sg = SpectrumGrid::new(k_cut, period)?;
    for flat in 0..sg.data.len() {
        let m = sg.mode_of(flat);
        if !positive_half(m) {
            continue;
        }
        match mode_to_probe(sg.kappa_of(m), exp_cap) {
            Ok(p) => {
                let s = fourier_sample_dtn(delta, eps, &p, mask, exp_cap, tol, maxiter)
                    .map_err(|e| match e {
                        Error::NonConvergence { .. } => Error::SolverFailure {
                            context: format!("mode {m:?}"),
                            source: Box::new(e),
                        },
                        other => other,
                    })?;
                set_pair(&mut sg, m, s / p.prefactor(), ModeStatus::Sampled, p.growth_bound());
            }
            Err(Error::Overflow { exponent, .. }) => {
                set_pair(&mut sg, m, czero(), ModeStatus::DroppedCap, exponent);
            }
            Err(e) => return Err(e),
        }
    }
    let dc = sg.idx([0, 0, 0]);
    sg.status[dc] = ModeStatus::DcFilled;
    Ok(sg)
}

fn axis_coords(grid: Grid3D, axis: usize) -> Vec<f64> {
    (0..grid.n[axis]).map(|i| grid.origin[axis] + i as f64 * grid.h).collect()
}

/// Row-major [node][mode] table of e^{i sign x kappa(t)}.
fn phase_table(coords: &[f64], k_cut: i32, freq: f64, sign: f64) -> Vec<Complex64> {
    let side = (2 * k_cut + 1) as usize;
    let mut tab = Vec::with_capacity(coords.len() * side);
    for &x in coords {
        for t in -k_cut..=k_cut {
            tab.push(Complex64::from_polar(1.0, sign * x * freq * t as f64));
        }
    }
    let _ = side;
    tab
}

/// Trapezoid-quadrature Fourier samples of `delta` on the full lattice,
/// separable axis by axis. This is the direct-DFT oracle the probe sweeps
/// are compared against; its DC entry is exact.
pub fn quadrature_spectrum(delta: &ScalarField<f64>, k_cut: i32, period: f64) -> Result<SpectrumGrid> {
    let mut sg = SpectrumGrid::new(k_cut, period)?;
    let grid = delta.grid;
    let n = grid.n;
    let side = sg.side();
    let freq = 2.0 * PI / period;
    let ph0 = phase_table(&axis_coords(grid, 0), k_cut, freq, 1.0);
    let ph1 = phase_table(&axis_coords(grid, 1), k_cut, freq, 1.0);
    let ph2 = phase_table(&axis_coords(grid, 2), k_cut, freq, 1.0);

    // collapse axis 0: p0[t0][i1, i2]
    let plane = n[1] * n[2];
    let mut p0 = vec![czero(); side * plane];
    for t0 in 0..side {
        let dst = &mut p0[t0 * plane..(t0 + 1) * plane];
        for i0 in 0..n[0] {
            let ph = ph0[i0 * side + t0];
            let src = &delta.data[i0 * plane..(i0 + 1) * plane];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += ph * s;
            }
        }
    }
    // collapse axis 1: p1[t0, t1][i2]
    let mut p1 = vec![czero(); side * side * n[2]];
    for t0 in 0..side {
        for t1 in 0..side {
            let dst = &mut p1[(t0 * side + t1) * n[2]..(t0 * side + t1 + 1) * n[2]];
            for i1 in 0..n[1] {
                let ph = ph1[i1 * side + t1];
                let src = &p0[t0 * plane + i1 * n[2]..t0 * plane + (i1 + 1) * n[2]];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d += ph * s;
                }
            }
        }
    }
    // collapse axis 2
    let vol = grid.h.powi(3);
    for t0 in 0..side {
        for t1 in 0..side {
            for t2 in 0..side {
                let mut acc = czero();
                for i2 in 0..n[2] {
                    acc += p1[(t0 * side + t1) * n[2] + i2] * ph2[i2 * side + t2];
                }
                sg.data[(t0 * side + t1) * side + t2] = acc * vol;
            }
        }
    }
    Ok(sg)
}

/// Inverse of the sampling convention: `delta(x) = (1/L^3) sum delta_hat(m)
/// e^{-i x . kappa(m)}`, real part. Separable partial sums, fixed order.
fn inverse_dft(sg: &SpectrumGrid, grid: Grid3D) -> ScalarField<f64> {
    let n = grid.n;
    let side = sg.side();
    let freq = 2.0 * PI / sg.period;
    let ph0 = phase_table(&axis_coords(grid, 0), sg.k_cut, freq, -1.0);
    let ph1 = phase_table(&axis_coords(grid, 1), sg.k_cut, freq, -1.0);
    let ph2 = phase_table(&axis_coords(grid, 2), sg.k_cut, freq, -1.0);

    // collapse t0: a0[t1, t2][i0]
    let mut a0 = vec![czero(); side * side * n[0]];
    for t1 in 0..side {
        for t2 in 0..side {
            for i0 in 0..n[0] {
                let mut acc = czero();
                for t0 in 0..side {
                    acc += sg.data[(t0 * side + t1) * side + t2] * ph0[i0 * side + t0];
                }
                a0[(t1 * side + t2) * n[0] + i0] = acc;
            }
        }
    }
    // collapse t1: a1[t2][i0, i1]
    let mut a1 = vec![czero(); side * n[0] * n[1]];
    for t2 in 0..side {
        for i0 in 0..n[0] {
            for i1 in 0..n[1] {
                let mut acc = czero();
                for t1 in 0..side {
                    acc += a0[(t1 * side + t2) * n[0] + i0] * ph1[i1 * side + t1];
                }
                a1[(t2 * n[0] + i0) * n[1] + i1] = acc;
            }
        }
    }
    // collapse t2
    let scale = 1.0 / sg.period.powi(3);
    let mut out = ScalarField::zeros(grid);
    for i0 in 0..n[0] {
        for i1 in 0..n[1] {
            for i2 in 0..n[2] {
                let mut acc = czero();
                for t2 in 0..side {
                    acc += a1[(t2 * n[0] + i0) * n[1] + i1] * ph2[i2 * side + t2];
                }
                out.data[(i0 * n[1] + i1) * n[2] + i2] = acc.re * scale;
            }
        }
    }
    out
}

/// Invert a sampled spectrum onto `grid`. Refuses spectra whose Hermitian
/// asymmetry exceeds `asym_tol` (relative to the largest sample), then
/// symmetrizes, fills a flagged DC entry from its six lattice neighbors, and
/// evaluates the truncated series. The spectrum is mutated to the exact
/// coefficients that were inverted, so callers can report them.
pub fn reconstruct(sg: &mut SpectrumGrid, grid: Grid3D, asym_tol: f64) -> Result<ScalarField<f64>> {
    let asym = sg.asymmetry();
    if asym > asym_tol {
        return Err(Error::AsymmetricSpectrum { asym, tol: asym_tol });
    }
    sg.symmetrize();
    sg.fill_dc();
    Ok(inverse_dft(sg, grid))
}

/// The K-band-limited projection of `delta` under the same lattice and the
/// same quadrature the sweeps use, with the DC entry exact.
pub fn band_limited_truth(delta: &ScalarField<f64>, k_cut: i32, period: f64) -> Result<ScalarField<f64>> {
    let sg = quadrature_spectrum(delta, k_cut, period)?;
    Ok(inverse_dft(&sg, delta.grid))
}

/// Projection of `delta` onto the modes `sg` actually inverted: quadrature
/// coefficients on the same lattice, zeroed wherever the sweep refused the
/// mode. Modes beyond the growth cap never enter the reconstruction, so a
/// fair target excludes them too; everything else (including the DC fill)
/// is machinery and stays in the comparison.
pub fn used_band_truth(delta: &ScalarField<f64>, sg: &SpectrumGrid) -> Result<ScalarField<f64>> {
    let mut tr = quadrature_spectrum(delta, sg.k_cut, sg.period)?;
    for (d, st) in tr.data.iter_mut().zip(&sg.status) {
        if *st == ModeStatus::DroppedCap {
            *d = czero();
        }
    }
    Ok(inverse_dft(&tr, delta.grid))
}

/// Relative L2 error of a reconstruction against the projection of the true
/// perturbation onto the modes the sweep inverted (band-limiting the truth
/// separates machinery error from plain series truncation).
pub fn recon_error(
    delta_true: &ScalarField<f64>,
    delta_rec: &ScalarField<f64>,
    sg: &SpectrumGrid,
) -> Result<f64> {
    delta_true.grid.check_same(&delta_rec.grid)?;
    let bl = used_band_truth(delta_true, sg)?;
    let num: f64 =
        pairwise_sum_scalar_by(bl.data.len(), |i| (delta_rec.data[i] - bl.data[i]).powi(2));
    let den: f64 = pairwise_sum_scalar_by(bl.data.len(), |i| bl.data[i].powi(2));
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}
