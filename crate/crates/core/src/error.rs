use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factorization {factors:?} does not multiply to {dim}")]
    BadFactorization { dim: usize, factors: Vec<usize> },

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid subsystem index {index} for {count} subsystems")]
    InvalidSubsystem { index: usize, count: usize },

    #[error("state has zero or non-finite norm")]
    ZeroNorm,

    #[error("selections are orthogonal: |<psi_f|psi_i>| = {overlap:.3e}")]
    OrthogonalSelection { overlap: f64 },

    #[error("trace of W is {trace}, expected 1")]
    TraceNotOne { trace: num_complex::Complex64 },

    #[error("assignment is infeasible: residual {residual:.3e}")]
    Infeasible { residual: f64 },

    #[error("realization degenerate: z.I = {value:.3e}")]
    DegenerateRealization { value: f64 },

    #[error("symmetrized operators are linearly dependent (smallest singular value {min_singular:.3e})")]
    DependentSymmetrizedSet { min_singular: f64 },

    #[error("requested order s = {requested} differs from minimal polynomial degree {found} at theta = {theta}")]
    DegreeMismatch { requested: usize, found: usize, theta: f64 },

    #[error("dimension {0} is even; discrete Weyl construction needs odd d")]
    EvenDimension(usize),

    #[error("polynomial of degree {0} has no real root branch for every target")]
    EvenDegree(usize),

    #[error("root branch jumps by {jump:.3e} at grid index {index}")]
    RootTrackingBreak { index: usize, jump: f64 },

    #[error("Kraus amplitude collapses to {min_modulus:.3e} on the fit window")]
    AmplitudeCollapse { min_modulus: f64 },

    #[error("state extends to {reach:.3} but the grid half-width is {half_width:.3}")]
    EdgeClipping { reach: f64, half_width: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
