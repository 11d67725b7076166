//! Deterministic reductions.
//!
//! Every norm, dot product and integral in the crate funnels through these
//! pairwise sums. The reduction tree depends only on the slice length, never
//! on chunk boundaries chosen at run time, so outputs are bit-identical
//! across runs and across thread settings. Pairwise summation also keeps the
//! rounding error at O(eps * log n) instead of O(eps * n).

use num_complex::Complex64;

const BLOCK: usize = 32;

/// Pairwise sum with a fixed reduction tree.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(i)` over `0..n` without materializing the values.
pub fn pairwise_sum_by<F: FnMut(usize) -> f64 + Copy>(n: usize, f: F) -> f64 {
    fn rec<F: FnMut(usize) -> f64 + Copy>(lo: usize, hi: usize, mut f: F) -> f64 {
        if hi - lo <= BLOCK {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Same fixed tree, generic over the crate's scalar types.
pub fn pairwise_sum_scalar_by<S, F>(n: usize, f: F) -> S
where
    S: crate::scalar::Scalar,
    F: FnMut(usize) -> S + Copy,
{
    fn rec<S: crate::scalar::Scalar, F: FnMut(usize) -> S + Copy>(lo: usize, hi: usize, mut f: F) -> S {
        if hi - lo <= BLOCK {
            let mut acc = S::zero();
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

pub fn pairwise_sum_complex_by<F: FnMut(usize) -> Complex64 + Copy>(n: usize, f: F) -> Complex64 {
    fn rec<F: FnMut(usize) -> Complex64 + Copy>(lo: usize, hi: usize, mut f: F) -> Complex64 {
        if hi - lo <= BLOCK {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Euclidean dot product, deterministic tree.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
