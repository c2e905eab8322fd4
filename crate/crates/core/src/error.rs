use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 4 intervals, got {0}")]
    GridTooCoarse(usize),

    #[error("invalid step configuration: {0}")]
    InvalidStepConfig(String),

    #[error("Newton iteration failed at node {node}: residual {residual:e} after {iterations} iterations")]
    NewtonDivergence {
        node: usize,
        residual: f64,
        iterations: usize,
    },

    #[error("shifted field must vanish at both ends, found {left:e} and {right:e}")]
    UnshiftedInput { left: f64, right: f64 },

    #[error("incompatible corner data at ({corner}): mismatch {mismatch:e}")]
    IncompatibleCorners { corner: &'static str, mismatch: f64 },

    #[error("infeasible subdomain layout: {0}")]
    InfeasibleLayout(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid filter: {0}")]
    InvalidFilter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
