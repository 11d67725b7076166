//! Periodic spectral solves on padded boxes.
//!
//! The conjugate construction needs a particular solution of
//! `curl U = W, div U = 0` without committing to boundary conditions. It is
//! obtained on a periodic box at least twice the domain extent: embed the
//! field, roll it to zero across the pad with a C^2 window, and invert in
//! Fourier space (`U^ = i k x W^ / |k|^2`), which automatically yields the
//! Leray (divergence-free) projection of the windowed field as its curl.
//!
//! All transforms run single-threaded through rustfft with plans chosen by
//! size only, so outputs are reproducible bit for bit.

use crate::error::{Error, Result};
use crate::grid::{Grid3D, VectorField3};
use crate::scenario::quintic_step;
use crate::sums::pairwise_sum_by;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Smallest size >= n whose prime factors are all in {2, 3, 5}.
pub fn next_fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2usize, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// In-place 3D FFT, x2 fastest. `inverse` includes the 1/N^3 normalization.
pub fn fft3_inplace(data: &mut [Complex64], n: [usize; 3], inverse: bool) {
    assert_eq!(data.len(), n[0] * n[1] * n[2]);
    let mut planner = FftPlanner::<f64>::new();
    // axis 2: contiguous lines
    {
        let fft = if inverse {
            planner.plan_fft_inverse(n[2])
        } else {
            planner.plan_fft_forward(n[2])
        };
        for line in data.chunks_exact_mut(n[2]) {
            fft.process(line);
        }
    }
    // axes 0 and 1: gather/scatter through a scratch line
    for axis in [0usize, 1] {
        let len = n[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let stride = if axis == 0 { n[1] * n[2] } else { n[2] };
        let mut scratch = vec![Complex64::new(0.0, 0.0); len];
        let (outer, inner) = if axis == 0 { (n[1], n[2]) } else { (n[0], n[2]) };
        for a in 0..outer {
            for b in 0..inner {
                let base = if axis == 0 { a * n[2] + b } else { a * n[1] * n[2] + b };
                for (j, s) in scratch.iter_mut().enumerate() {
                    *s = data[base + j * stride];
                }
                fft.process(&mut scratch);
                for (j, s) in scratch.iter().enumerate() {
                    data[base + j * stride] = *s;
                }
            }
        }
    }
    if inverse {
        let scale = 1.0 / (n[0] * n[1] * n[2]) as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

fn wavenumber(m: usize, n: usize, h: f64) -> f64 {
    let s = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
    2.0 * std::f64::consts::PI * s as f64 / (n as f64 * h)
}

fn to_spectra(v: &VectorField3<f64>) -> [Vec<Complex64>; 3] {
    let n = v.grid.n;
    let mut out = [
        Vec::with_capacity(v.data.len()),
        Vec::with_capacity(v.data.len()),
        Vec::with_capacity(v.data.len()),
    ];
    for val in &v.data {
        for k in 0..3 {
            out[k].push(Complex64::new(val[k], 0.0));
        }
    }
    for buf in out.iter_mut() {
        fft3_inplace(buf, n, false);
    }
    out
}

fn from_spectra(grid: Grid3D, mut spectra: [Vec<Complex64>; 3]) -> VectorField3<f64> {
    for buf in spectra.iter_mut() {
        fft3_inplace(buf, grid.n, true);
    }
    let mut out = VectorField3::zeros(grid);
    for (i, val) in out.data.iter_mut().enumerate() {
        *val = [spectra[0][i].re, spectra[1][i].re, spectra[2][i].re];
    }
    out
}

fn for_each_mode(n: [usize; 3], h: f64, mut f: impl FnMut(usize, [f64; 3])) {
    let mut idx = 0;
    for m0 in 0..n[0] {
        let k0 = wavenumber(m0, n[0], h);
        for m1 in 0..n[1] {
            let k1 = wavenumber(m1, n[1], h);
            for m2 in 0..n[2] {
                let k2 = wavenumber(m2, n[2], h);
                f(idx, [k0, k1, k2]);
                idx += 1;
            }
        }
    }
}

/// `U` with `curl U = P W` (Leray projection of `W`), `div U = 0`, zero mean,
/// on the periodic interpretation of `w.grid`.
pub fn curl_inverse_periodic(w: &VectorField3<f64>) -> VectorField3<f64> {
    let n = w.grid.n;
    let mut sp = to_spectra(w);
    for_each_mode(n, w.grid.h, |idx, k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            sp[0][idx] = Complex64::new(0.0, 0.0);
            sp[1][idx] = Complex64::new(0.0, 0.0);
            sp[2][idx] = Complex64::new(0.0, 0.0);
            return;
        }
        let wv = [sp[0][idx], sp[1][idx], sp[2][idx]];
        let cross = [
            wv[2] * k[1] - wv[1] * k[2],
            wv[0] * k[2] - wv[2] * k[0],
            wv[1] * k[0] - wv[0] * k[1],
        ];
        let i_over_k2 = Complex64::new(0.0, 1.0 / k2);
        sp[0][idx] = cross[0] * i_over_k2;
        sp[1][idx] = cross[1] * i_over_k2;
        sp[2][idx] = cross[2] * i_over_k2;
    });
    from_spectra(w.grid, sp)
}

/// Remove the gradient part: `V - grad(LapInv(div V))`, keeping the mean.
pub fn leray_project_periodic(v: &VectorField3<f64>) -> VectorField3<f64> {
    let n = v.grid.n;
    let mut sp = to_spectra(v);
    for_each_mode(n, v.grid.h, |idx, k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return;
        }
        let dot = sp[0][idx] * k[0] + sp[1][idx] * k[1] + sp[2][idx] * k[2];
        let f = dot / k2;
        sp[0][idx] -= f * k[0];
        sp[1][idx] -= f * k[1];
        sp[2][idx] -= f * k[2];
    });
    from_spectra(v.grid, sp)
}

/// Spectral curl on the periodic interpretation of the grid.
pub fn curl_periodic(v: &VectorField3<f64>) -> VectorField3<f64> {
    let n = v.grid.n;
    let mut sp = to_spectra(v);
    for_each_mode(n, v.grid.h, |idx, k| {
        let vv = [sp[0][idx], sp[1][idx], sp[2][idx]];
        let i = Complex64::new(0.0, 1.0);
        sp[0][idx] = (vv[2] * k[1] - vv[1] * k[2]) * i;
        sp[1][idx] = (vv[0] * k[2] - vv[2] * k[0]) * i;
        sp[2][idx] = (vv[1] * k[0] - vv[0] * k[1]) * i;
    });
    from_spectra(v.grid, sp)
}

/// `|div V|_2 / |V|_2` measured in Fourier space (Parseval).
pub fn spectral_div_rel(v: &VectorField3<f64>) -> f64 {
    let n = v.grid.n;
    let sp = to_spectra(v);
    let mut div2 = Vec::with_capacity(v.data.len());
    let mut mag2 = Vec::with_capacity(v.data.len());
    for_each_mode(n, v.grid.h, |idx, k| {
        let d = sp[0][idx] * k[0] + sp[1][idx] * k[1] + sp[2][idx] * k[2];
        div2.push(d.norm_sqr());
        mag2.push(sp[0][idx].norm_sqr() + sp[1][idx].norm_sqr() + sp[2][idx].norm_sqr());
    });
    let num = pairwise_sum_by(div2.len(), |i| div2[i]).sqrt();
    let den = pairwise_sum_by(mag2.len(), |i| mag2[i]).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// A cube grid embedded centrally in a periodic box of at least twice the
/// extent, same spacing.
#[derive(Clone, Copy, Debug)]
pub struct PaddedBox {
    pub cube: Grid3D,
    pub grid: Grid3D,
    /// Index offset of cube node 0 along each axis.
    pub lo: usize,
}

impl PaddedBox {
    pub fn for_cube(cube: Grid3D) -> Result<PaddedBox> {
        if cube.n[0] != cube.n[1] || cube.n[1] != cube.n[2] {
            return Err(Error::DomainViolation {
                what: format!("padded solves need a cubic grid, got {:?}", cube.n),
            });
        }
        let n = cube.n[0];
        let big = next_fast_size(2 * (n - 1));
        let lo = (big - n) / 2;
        let origin = [
            cube.origin[0] - lo as f64 * cube.h,
            cube.origin[1] - lo as f64 * cube.h,
            cube.origin[2] - lo as f64 * cube.h,
        ];
        let grid = Grid3D::new([big; 3], cube.h, origin)?;
        Ok(PaddedBox { cube, grid, lo })
    }

    /// Extend the cube field into the pad by clamping to the nearest cube
    /// node, then roll smoothly to zero across the pad. The window is
    /// identically 1 on the whole embedded cube and reaches exactly 0 at the
    /// periodic seam (each side normalized by its own pad depth), so boundary
    /// values taper instead of jumping.
    pub fn embed_windowed(&self, v: &VectorField3<f64>) -> Result<VectorField3<f64>> {
        self.cube.check_same(&v.grid)?;
        let n = self.cube.n[0];
        let big = self.grid.n[0];
        let pad_lo = self.lo as f64;
        let pad_hi = (big - self.lo - n) as f64;
        let profile: Vec<(f64, usize)> = (0..big)
            .map(|i| {
                if i < self.lo {
                    (1.0 - quintic_step((self.lo - i) as f64 / pad_lo), 0)
                } else if i >= self.lo + n {
                    (
                        1.0 - quintic_step((i - (self.lo + n - 1)) as f64 / pad_hi),
                        n - 1,
                    )
                } else {
                    (1.0, i - self.lo)
                }
            })
            .collect();
        let mut out = VectorField3::zeros(self.grid);
        for i0 in 0..big {
            let (w0, j0) = profile[i0];
            for i1 in 0..big {
                let (w1, j1) = profile[i1];
                for i2 in 0..big {
                    let (w2, j2) = profile[i2];
                    let w = w0 * w1 * w2;
                    if w == 0.0 {
                        continue;
                    }
                    let val = v.at([j0, j1, j2]);
                    let idx = self.grid.idx([i0, i1, i2]);
                    out.data[idx] = [val[0] * w, val[1] * w, val[2] * w];
                }
            }
        }
        Ok(out)
    }

    pub fn restrict(&self, v: &VectorField3<f64>) -> Result<VectorField3<f64>> {
        self.grid.check_same(&v.grid)?;
        let n = self.cube.n[0];
        let mut out = VectorField3::zeros(self.cube);
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    out.data[out.grid.idx([i0, i1, i2])] =
                        v.at([i0 + self.lo, i1 + self.lo, i2 + self.lo]);
                }
            }
        }
        Ok(out)
    }
}
