use thiserror::Error;

/// Everything that can go wrong across the laboratory.
///
/// Variants carry enough context to be actionable from the command line;
/// none of them wrap `Box<dyn Error>` because every failure mode here is
/// a finite, known condition.
#[derive(Debug, Error)]
pub enum Error {
    /// Grids below 5^3 cannot host the interior stencils.
    #[error("grid too small: {n:?} (need at least 5 nodes per axis)")]
    GridTooSmall { n: [usize; 3] },

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {left:?} vs {right:?}")]
    GridMismatch { left: [usize; 3], right: [usize; 3] },

    /// A point or a mask reaches outside the domain the operation supports.
    #[error("domain violation: {what}")]
    DomainViolation { what: String },

    /// An isotropic frequency (|zeta| = 0) where a division by it is required.
    #[error("zero complex norm: {what}")]
    ZeroNorm { what: String },

    /// Clifford element with (numerically) vanishing quadratic form.
    #[error("element not invertible: |q(a)| = {quad_mag:.3e} below threshold {threshold:.3e}")]
    NotInvertible { quad_mag: f64, threshold: f64 },

    /// Iterative solver ran out of budget.
    #[error("solver did not converge: {iters} iterations, relative residual {residual:.3e}")]
    NonConvergence { iters: usize, residual: f64 },

    /// Input to the conjugate construction is not (numerically) divergence free.
    #[error("compatibility failure: relative divergence {rel_div:.3e} exceeds {tol:.3e}")]
    CompatibilityFailure { rel_div: f64, tol: f64 },

    /// A field and a mask disagree about which nodes are active.
    #[error("mask mismatch: {what}")]
    MaskMismatch { what: String },

    /// k = 0 has no probe pair.
    #[error("zero wavevector has no probe factorization")]
    ZeroWavevector,

    /// Requested exponential growth exceeds the configured cap.
    #[error("probe growth exp({exponent:.3}) exceeds cap exp({cap:.3})")]
    Overflow { exponent: f64, cap: f64 },

    /// Spectrum fails the Hermitian symmetry a real reconstruction needs.
    #[error("spectrum asymmetry {asym:.3e} exceeds tolerance {tol:.3e}")]
    AsymmetricSpectrum { asym: f64, tol: f64 },

    /// A forward solve inside a pipeline failed.
    #[error("forward solver failure at {context}: {source}")]
    SolverFailure {
        context: String,
        #[source]
        source: Box<Error>,
    },

    /// Configuration file or output path trouble.
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code contract: 0 ok, 1 tolerance breach, 2 config/usage,
    /// 3 solver non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::NonConvergence { .. } | Error::SolverFailure { .. } => 3,
            _ => 1,
        }
    }
}
