//! Named synthetic scenarios: smooth conductivities, perturbations and
//! manufactured potentials used by the commands and the test suites.
//!
//! Everything here is C^2 or better and either exactly 1 (conductivities) or
//! exactly 0 (perturbations, potentials) outside a controlled radius, so the
//! "unit near the boundary" invariants hold bitwise rather than just
//! approximately.

use crate::grid::{Grid3D, ScalarField, VectorField3};

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 at both ends.
pub fn quintic_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// C^2 radial cutoff: exactly 1 for r <= r_on, exactly 0 for r >= r_off.
pub fn radial_cutoff(r: f64, r_on: f64, r_off: f64) -> f64 {
    1.0 - quintic_step((r - r_on) / (r_off - r_on))
}

/// Smooth interior bump: Gaussian of the given width and amplitude centered
/// at `center`, cut off to exactly zero beyond `r_off` (measured from the
/// domain origin, not the bump center).
pub fn gaussian_bump(x: [f64; 3], center: [f64; 3], amp: f64, width: f64, r_off: f64) -> f64 {
    let r2 = x.iter().map(|v| v * v).sum::<f64>();
    let d2 = x
        .iter()
        .zip(&center)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>();
    let cut = radial_cutoff(r2.sqrt(), 0.7 * r_off, r_off);
    amp * (-d2 / (2.0 * width * width)).exp() * cut
}

/// The default smooth conductivity: 1 + a centered bump, identically 1 for
/// r >= 0.85 (in particular on the two outermost node layers of the cube and
/// on the ball boundary collar).
pub fn sigma_smooth(grid: Grid3D) -> ScalarField<f64> {
    ScalarField::from_fn(grid, |x| 1.0 + gaussian_bump(x, [0.15, -0.1, 0.2], 0.4, 0.3, 0.85))
}

/// The reconstruction target: compact perturbation, amplitude 0.1, width 0.2,
/// centered, identically zero for r >= 0.85.
pub fn delta_gaussian(grid: Grid3D) -> ScalarField<f64> {
    ScalarField::from_fn(grid, |x| delta_gaussian_at(x))
}

pub fn delta_gaussian_at(x: [f64; 3]) -> f64 {
    gaussian_bump(x, [0.0, 0.0, 0.0], 0.1, 0.2, 0.85)
}

/// Manufactured divergence-free vector potential target: U* = curl A with
/// A a narrow Gaussian-profile field (tails below 1e-8 of peak at the unit
/// cube boundary, so it is compact for every coupling tolerance in play).
/// Both U* and curl U* are returned in closed form, so spectral recovery can
/// be checked against an exact oracle.
pub struct ManufacturedPotential {
    pub width: f64,
    pub amp: [f64; 3],
}

impl Default for ManufacturedPotential {
    fn default() -> Self {
        ManufacturedPotential { width: 0.15, amp: [0.7, -0.4, 0.5] }
    }
}

impl ManufacturedPotential {
    fn a(&self, x: [f64; 3]) -> [f64; 3] {
        let w2 = self.width * self.width;
        let g = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * w2)).exp();
        [self.amp[0] * g, self.amp[1] * g, self.amp[2] * g]
    }

    /// U* = curl A, analytically.
    pub fn u_star(&self, x: [f64; 3]) -> [f64; 3] {
        let a = self.a(x);
        let w2 = self.width * self.width;
        // d_j a_k = -x_j a_k / w^2
        let d = |j: usize, k: usize| -x[j] * a[k] / w2;
        [d(1, 2) - d(2, 1), d(2, 0) - d(0, 2), d(0, 1) - d(1, 0)]
    }

    /// curl U* = curl curl A = grad div A - Lap A, analytically.
    pub fn curl_u_star(&self, x: [f64; 3]) -> [f64; 3] {
        let w2 = self.width * self.width;
        let a = self.a(x);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        // div A = -(x . amp) g / w^2; d_j(div A) = (-amp_j + x_j (x.amp)/w^2) g / w^2
        let xdota = x[0] * self.amp[0] + x[1] * self.amp[1] + x[2] * self.amp[2];
        let g = (-(r2) / (2.0 * w2)).exp();
        let grad_div = |j: usize| (-self.amp[j] + x[j] * xdota / w2) * g / w2;
        // Lap A_k = (r^2/w^2 - 3) a_k / w^2
        let lap = |k: usize| (r2 / w2 - 3.0) * a[k] / w2;
        [
            grad_div(0) - lap(0),
            grad_div(1) - lap(1),
            grad_div(2) - lap(2),
        ]
    }

    pub fn u_star_field(&self, grid: Grid3D) -> VectorField3<f64> {
        VectorField3::from_fn(grid, |x| self.u_star(x))
    }

    pub fn flux_field(&self, grid: Grid3D) -> VectorField3<f64> {
        VectorField3::from_fn(grid, |x| self.curl_u_star(x))
    }
}
