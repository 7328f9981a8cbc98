use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid block partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The scalar subproblem is not strongly convex: weight `q_j / eps` must
    /// exceed the semi-convexity modulus of the regularizer.
    #[error("prox weight {weight} does not exceed semi-convexity modulus {rho}")]
    ProxPrecondition { weight: f64, rho: f64 },

    #[error("power iteration did not converge within {iters} steps")]
    PowerIteration { iters: usize },

    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    #[error("invalid schedule at k={k}: {quantity} = {value} violates bound {bound}")]
    InvalidSchedule {
        k: usize,
        quantity: String,
        value: f64,
        bound: f64,
    },

    #[error("infeasible step size: {0}")]
    InfeasibleStep(String),

    #[error("non-finite objective value at iteration {k}")]
    NonFiniteObjective { k: usize },

    #[error("no sample landed in the neighborhood after {draws} draws")]
    EmptyNeighborhood { draws: usize },

    #[error("fit window too short: {len} points (need at least {min})")]
    WindowTooShort { len: usize, min: usize },

    #[error("non-positive gap {value} at index {index} inside the fit window")]
    NonPositiveGap { index: usize, value: f64 },

    #[error("reference run diverged: F increased from {before} to {after} at step {k}")]
    Divergence { k: usize, before: f64, after: f64 },

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("replication {id} failed: {source}")]
    Replication {
        id: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
