//! calderon-lab: a desk-scale numerical laboratory for a Clifford-analysis
//! route to electrical impedance imaging in three dimensions.
//!
//! Conductivity equations div(sigma grad u) = 0 on the unit ball are recast
//! as a first-order Beltrami-type system for a Clifford-algebra-valued
//! potential. The crate provides the algebra, the discrete first-order
//! calculus, a family of exponential monogenic functions, the sigma-harmonic
//! conjugate construction, a finite-difference forward solver with
//! boundary-data pairings, and a linearized reconstruction pipeline that
//! recovers an interior perturbation from boundary measurements alone.
//!
//! Everything is deterministic: reductions use fixed-shape pairwise trees,
//! random draws are seeded, and repeated runs produce byte-identical reports.

pub mod beltrami;
pub mod dtn;
pub mod calculus;
pub mod clifford;
pub mod config;
pub mod error;
pub mod expfun;
pub mod grid;
pub mod io;
pub mod recon;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod spectral;
pub mod sums;

pub use clifford::{complexify, Clifford};
pub use error::{Error, Result};
pub use grid::{CliffordField, Grid3D, ScalarField, VectorField3};

use num_complex::Complex64;

/// Real-coefficient algebra element (quaternion-like).
pub type CliffordR = Clifford<f64>;
/// Complexified algebra element; this is where zero divisors live.
pub type CliffordC = Clifford<Complex64>;
