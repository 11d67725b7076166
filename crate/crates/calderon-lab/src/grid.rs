//! Uniform tensor grids on axis-aligned boxes, and the field containers the
//! discrete calculus operates on.
//!
//! Storage is node-major with the x2 index fastest:
//! `idx = (i0 * n1 + i1) * n2 + i2`. Derivative stencils only ever write
//! interior nodes; callers measure residuals with the `*_margin` norms so the
//! untouched boundary ring never pollutes a comparison.

use crate::clifford::Clifford;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sums::pairwise_sum_by;
use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3D {
    pub n: [usize; 3],
    pub h: f64,
    pub origin: [f64; 3],
}

impl Grid3D {
    pub fn new(n: [usize; 3], h: f64, origin: [f64; 3]) -> Result<Self> {
        if n.iter().any(|&m| m < 5) {
            return Err(Error::GridTooSmall { n });
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::DomainViolation { what: format!("spacing h = {h}") });
        }
        Ok(Grid3D { n, h, origin })
    }

    /// Symmetric cube [-extent, extent]^3 with `n` nodes per axis.
    pub fn cube(n: usize, extent: f64) -> Result<Self> {
        let h = 2.0 * extent / (n as f64 - 1.0);
        Grid3D::new([n; 3], h, [-extent; 3])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n[1] + i[1]) * self.n[2] + i[2]
    }

    #[inline]
    pub fn coord(&self, i: [usize; 3]) -> [f64; 3] {
        [
            self.origin[0] + self.h * i[0] as f64,
            self.origin[1] + self.h * i[1] as f64,
            self.origin[2] + self.h * i[2] as f64,
        ]
    }

    /// Strides for moving one node along each axis.
    #[inline]
    pub fn strides(&self) -> [usize; 3] {
        [self.n[1] * self.n[2], self.n[2], 1]
    }

    pub fn check_same(&self, other: &Grid3D) -> Result<()> {
        if self.n != other.n
            || (self.h - other.h).abs() > 1e-12 * self.h.abs()
            || self
                .origin
                .iter()
                .zip(&other.origin)
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()))
        {
            return Err(Error::GridMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    /// Visit every node with `i_k` in `[margin, n_k - margin)`.
    pub fn for_each_margin<F: FnMut([usize; 3], usize)>(&self, margin: usize, mut f: F) {
        for i0 in margin..self.n[0] - margin {
            for i1 in margin..self.n[1] - margin {
                let row = (i0 * self.n[1] + i1) * self.n[2];
                for i2 in margin..self.n[2] - margin {
                    f([i0, i1, i2], row + i2);
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalarField<S: Scalar> {
    pub grid: Grid3D,
    pub data: Vec<S>,
}

#[derive(Clone, Debug)]
pub struct VectorField3<S: Scalar> {
    pub grid: Grid3D,
    pub data: Vec<[S; 3]>,
}

#[derive(Clone, Debug)]
pub struct CliffordField<S: Scalar> {
    pub grid: Grid3D,
    pub data: Vec<Clifford<S>>,
}

impl<S: Scalar> ScalarField<S> {
    pub fn zeros(grid: Grid3D) -> Self {
        ScalarField { grid, data: vec![S::zero(); grid.len()] }
    }

    pub fn from_fn(grid: Grid3D, f: impl Fn([f64; 3]) -> S) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i0 in 0..grid.n[0] {
            for i1 in 0..grid.n[1] {
                for i2 in 0..grid.n[2] {
                    data.push(f(grid.coord([i0, i1, i2])));
                }
            }
        }
        ScalarField { grid, data }
    }

    #[inline]
    pub fn at(&self, i: [usize; 3]) -> S {
        self.data[self.grid.idx(i)]
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        ScalarField { grid: self.grid, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn norm_l2_margin(&self, margin: usize) -> f64 {
        margin_norm_l2(&self.grid, margin, |idx| self.data[idx].modulus_sq())
    }

    pub fn norm_max_margin(&self, margin: usize) -> f64 {
        let mut m = 0.0f64;
        self.grid.for_each_margin(margin, |_, idx| {
            m = m.max(to_f64(self.data[idx].modulus_sq()).sqrt());
        });
        m
    }
}

impl<S: Scalar> VectorField3<S> {
    pub fn zeros(grid: Grid3D) -> Self {
        VectorField3 { grid, data: vec![[S::zero(); 3]; grid.len()] }
    }

    pub fn from_fn(grid: Grid3D, f: impl Fn([f64; 3]) -> [S; 3]) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i0 in 0..grid.n[0] {
            for i1 in 0..grid.n[1] {
                for i2 in 0..grid.n[2] {
                    data.push(f(grid.coord([i0, i1, i2])));
                }
            }
        }
        VectorField3 { grid, data }
    }

    #[inline]
    pub fn at(&self, i: [usize; 3]) -> [S; 3] {
        self.data[self.grid.idx(i)]
    }

    pub fn component(&self, k: usize) -> ScalarField<S> {
        ScalarField { grid: self.grid, data: self.data.iter().map(|v| v[k]).collect() }
    }

    pub fn norm_l2_margin(&self, margin: usize) -> f64 {
        margin_norm_l2(&self.grid, margin, |idx| {
            let v = self.data[idx];
            v[0].modulus_sq() + v[1].modulus_sq() + v[2].modulus_sq()
        })
    }

    pub fn norm_max_margin(&self, margin: usize) -> f64 {
        let mut m = 0.0f64;
        self.grid.for_each_margin(margin, |_, idx| {
            let v = self.data[idx];
            let s = v[0].modulus_sq() + v[1].modulus_sq() + v[2].modulus_sq();
            m = m.max(to_f64(s).sqrt());
        });
        m
    }
}

impl<S: Scalar> CliffordField<S> {
    pub fn zeros(grid: Grid3D) -> Self {
        CliffordField { grid, data: vec![Clifford::zero(); grid.len()] }
    }

    pub fn from_fn(grid: Grid3D, f: impl Fn([f64; 3]) -> Clifford<S>) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i0 in 0..grid.n[0] {
            for i1 in 0..grid.n[1] {
                for i2 in 0..grid.n[2] {
                    data.push(f(grid.coord([i0, i1, i2])));
                }
            }
        }
        CliffordField { grid, data }
    }

    #[inline]
    pub fn at(&self, i: [usize; 3]) -> Clifford<S> {
        self.data[self.grid.idx(i)]
    }

    pub fn map(&self, f: impl Fn(Clifford<S>) -> Clifford<S>) -> Self {
        CliffordField { grid: self.grid, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Clifford<S>, Clifford<S>) -> Clifford<S>) -> Self {
        CliffordField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn conj_field(&self) -> Self {
        self.map(|a| a.conj())
    }

    pub fn sc_field(&self) -> ScalarField<S> {
        ScalarField { grid: self.grid, data: self.data.iter().map(|a| a.sc()).collect() }
    }

    pub fn component(&self, k: usize) -> ScalarField<S> {
        ScalarField { grid: self.grid, data: self.data.iter().map(|a| a.c[k]).collect() }
    }

    pub fn norm_l2_margin(&self, margin: usize) -> f64 {
        margin_norm_l2(&self.grid, margin, |idx| {
            let a = &self.data[idx];
            a.c[0].modulus_sq() + a.c[1].modulus_sq() + a.c[2].modulus_sq() + a.c[3].modulus_sq()
        })
    }

    pub fn norm_max_margin(&self, margin: usize) -> f64 {
        let mut m = 0.0f64;
        self.grid.for_each_margin(margin, |_, idx| {
            m = m.max(to_f64(self.data[idx].norm()));
        });
        m
    }
}

fn to_f64<R: Float>(r: R) -> f64 {
    num_traits::ToPrimitive::to_f64(&r).unwrap_or(f64::NAN)
}

/// sqrt of a pairwise-summed margin restriction; the reduction tree is fixed
/// by the margin box shape, so results are reproducible bit for bit.
fn margin_norm_l2<R: Float>(
    grid: &Grid3D,
    margin: usize,
    sq_at: impl Fn(usize) -> R + Copy,
) -> f64 {
    let m = margin;
    if grid.n.iter().any(|&nk| nk < 2 * m + 1) {
        return 0.0;
    }
    let d = [grid.n[0] - 2 * m, grid.n[1] - 2 * m, grid.n[2] - 2 * m];
    let total = d[0] * d[1] * d[2];
    let sum = pairwise_sum_by(total, |lin| {
        let i0 = lin / (d[1] * d[2]);
        let r = lin % (d[1] * d[2]);
        let i1 = r / d[2];
        let i2 = r % d[2];
        to_f64(sq_at(grid.idx([i0 + m, i1 + m, i2 + m])))
    });
    sum.sqrt()
}
