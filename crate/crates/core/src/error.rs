use thiserror::Error;

/// Errors raised by lattice construction, operator assembly and the index pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),
    #[error("operator is not hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("operator does not conserve charge: {0}")]
    NotChargeConserving(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("basis too large: {0}")]
    BasisTooLarge(String),
    #[error("spectral gap {gap:.3e} is below the tolerance {tolerance:.3e}")]
    GapTooSmall { gap: f64, tolerance: f64 },
    #[error("ground multiplet is ill defined: {0}")]
    Multiplet(String),
    #[error("commutator bound violated: {what} = {value:.3e} exceeds {tolerance:.3e}")]
    CommutatorBound { what: String, value: f64, tolerance: f64 },
    #[error("term crosses both boundaries of the half torus: {0}")]
    CrossesBothBoundaries(String),
    #[error("generator term overlaps both strips: {0}")]
    OverlapsBothStrips(String),
    #[error("process has no generator or translation structure")]
    NoGenerator,
    #[error("transport split is not integral: spread {spread:.3e}")]
    NonIntegralSplit { spread: f64 },
    #[error("ground space failed the topological-order check: deviation {deviation:.3e}")]
    TopologicalOrder { deviation: f64 },
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("string operator: {0}")]
    StringOperator(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
