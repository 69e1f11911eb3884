//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be >= 1, got {0}")]
    InvalidDim(usize),

    #[error("non-finite coefficient at index {0:?}")]
    NonFiniteCoefficient(Vec<u32>),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("truncation tail mass {tail:.3e} exceeds tolerance {tol:.1e}; increase max_degree beyond {degree}")]
    TailMass { tail: f64, tol: f64, degree: usize },

    #[error("grid tail mass {tail:.3e} exceeds {tol:.1e} of the total mass; increase half-width to at least {suggested_r}")]
    GridTail { tail: f64, tol: f64, suggested_r: f64 },

    #[error("grid resolution must be >= 64, got {0}")]
    GridResolution(usize),

    #[error("grid half-width must be positive, got {0}")]
    GridHalfWidth(f64),

    #[error("signals must carry at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },

    #[error("nodes must be strictly increasing and finite")]
    BadNodes,

    #[error("Gauss-Hermite signals require nodes symmetric about 0")]
    AsymmetricNodes,

    #[error("Hermite recurrence overflowed at order {0}")]
    RecurrenceOverflow(usize),

    #[error("signal does not decay below {tol:.1e} at the node extremes (|f| = {value:.3e}); widen the node window")]
    InsufficientDecay { value: f64, tol: f64 },

    #[error("Hermite expansion tail fraction {0:.3e} exceeds {1:.1e}; increase the mode count")]
    ExpansionTail(f64, f64),

    #[error("mask is empty")]
    EmptyMask,

    #[error("grid specs do not match")]
    SpecMismatch,

    #[error("zero-norm function")]
    ZeroNorm,

    #[error("requested measure {requested} exceeds 0.9 of the window area {window}")]
    MeasureTooLarge { requested: f64, window: f64 },

    #[error("no level crossing along ray {theta:.6} rad: center outside the set or level above the maximum")]
    NoCrossing { theta: f64 },

    #[error("second-variation direction must have vanishing degree-0 and degree-1 coefficients (|a0| = {a0:.3e}, |a1| = {a1:.3e})")]
    NotAdmissible { a0: f64, a1: f64 },

    #[error("second-variation coefficient index must be >= 2, got {0}")]
    BadVIndex(usize),

    #[error("sweep needs a non-empty decreasing list of eps in (0, 0.1]")]
    BadSweepEps,

    #[error("sweep measure must lie in (0, 3], got {0}")]
    BadSweepMeasure(f64),

    #[error("basis cutoff must be <= 64, got {0}")]
    BasisTooLarge(usize),

    #[error("power iteration stagnated; top eigenvalue appears degenerate with invariant-subspace dimension {0}")]
    DegenerateEigenvalue(usize),

    #[error("dimension {0} is not supported here (supported: {1})")]
    UnsupportedDim(usize, &'static str),

    #[error("Monte Carlo sample count must be >= 10000, got {0}")]
    TooFewSamples(usize),

    #[error("Monte Carlo slack {slack:.3e} too large for the requested grid (scale {scale:.3e}); increase the sample count")]
    McVarianceTooLarge { slack: f64, scale: f64 },

    #[error("unsupported region kind {0:?}")]
    UnsupportedRegion(String),

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
