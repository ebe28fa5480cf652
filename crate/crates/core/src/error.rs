use thiserror::Error;

/// Which measurement invariant a candidate set of effects violates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("no effects supplied")]
    Empty,
    #[error("effect {index} is {rows}x{cols}, expected {dim}x{dim}")]
    Shape {
        index: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("effect {index} is not Hermitian (|E - E^dag|_F = {deviation:e})")]
    NotHermitian { index: usize, deviation: f64 },
    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { index: usize, min_eigenvalue: f64 },
    #[error("effect {index} exceeds the identity (max eigenvalue {max_eigenvalue})")]
    ExceedsIdentity { index: usize, max_eigenvalue: f64 },
    #[error("effects do not sum to the identity (completeness |sum - I|_F = {deviation:e})")]
    Incomplete { deviation: f64 },
    #[error("effect {index} is not idempotent (|P^2 - P|_F = {deviation:e})")]
    NotIdempotent { index: usize, deviation: f64 },
    #[error("effects {first} and {second} are not orthogonal (|P_i P_j|_F = {deviation:e})")]
    NotOrthogonal {
        first: usize,
        second: usize,
        deviation: f64,
    },
    #[error("grid shape {shape:?} needs {expected} effects, got {actual}")]
    GridSize {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },
    #[error("matrix is not Hermitian (|A - A^dag|_F = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not PSD: eigenvalue {eigenvalue:e} below tolerance")]
    NotPsd { eigenvalue: f64 },
    #[error("matrix is not unitary (|U^dag U - I|_F = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(#[from] Violation),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("axis {axis} out of range for a grid with {axes} axes")]
    AxisOutOfRange { axis: usize, axes: usize },
    #[error("expected a {expected}-outcome measurement, got {actual} outcomes")]
    OutcomeCount { expected: usize, actual: usize },
    #[error("orthonormal completion failed: only {found} of {needed} vectors found (last residual {residual:e})")]
    CompletionFailed { found: usize, needed: usize, residual: f64 },
    #[error("measurements {first} and {second} do not commute (max commutator norm {norm:e})")]
    NotCommuting { first: usize, second: usize, norm: f64 },
    #[error(
        "extensions {first} and {second} use different ancilla states (|sigma_i - sigma_j|_F = {deviation:e}); \
         commuting extensions with distinct ancilla states need not yield a joint measurement"
    )]
    AncillaStateMismatch {
        first: usize,
        second: usize,
        deviation: f64,
    },
    #[error("marginal along axis {axis} is not a projective measurement: {violation}")]
    MarginalNotProjective { axis: usize, violation: Violation },
    #[error("outcome grid has {size} cells, above the configured cap of {cap}")]
    GridTooLarge { size: usize, cap: usize },
    #[error("W residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("extension commutator norm {norm:e} exceeds tolerance {tol:e} although the W residual passed")]
    InconsistentCommutation { norm: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
