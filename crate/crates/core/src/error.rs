use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("subvariety {subvariety} is incompatible with ambient {ambient}")]
    IncompatibleSubvariety { subvariety: String, ambient: String },

    #[error("reference symbol is not ample for the polytope: {0}")]
    NonAmpleReference(String),

    #[error("grid too coarse: n_per_axis = {n} (need an odd count >= 33)")]
    GridTooCoarse { n: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("lattice point count {count} exceeds the overflow guard")]
    Overflow { count: u64 },

    #[error("quadrature underflow at m = {m}: every Gram entry vanished")]
    QuadratureUnderflow { m: u32 },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("Cholesky pivot ratio {ratio:e} exceeds the conditioning guard {limit:e}")]
    IllConditioned { ratio: f64, limit: f64 },

    #[error("log of vanishing kernel at {} grid points", masked.len())]
    LogOfZero { masked: Vec<usize> },

    #[error("target section is not in the image of the restriction map: {0}")]
    NotInImage(String),

    #[error("degenerate hull: {0}")]
    HullDegenerate(String),

    #[error("insufficient sweep: {0}")]
    InsufficientSweep(String),

    #[error("fitted constant {c:e} is unbounded")]
    Unbounded { c: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
