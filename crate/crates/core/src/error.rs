use std::fmt;

use thiserror::Error;

/// Which invariant band a soft monitor left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    Jacobian,
    Cofactor,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Jacobian => write!(f, "|J-1|"),
            Band::Cofactor => write!(f, "|A-I|"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("Sobolev index {0} out of range")]
    SobolevIndex(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular map: min J = {min_j:.6e} (floor {j_min}), max |A-I| = {a_dev:.6e}")]
    SingularMap { min_j: f64, j_min: f64, a_dev: f64 },
    #[error("map left the {band} band: {value:.6e} > {limit}")]
    BandExit { band: Band, value: f64, limit: f64 },
    #[error("elliptic coefficient not admissible: {0}")]
    Coefficient(String),
    #[error("CG did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Taylor sign violated at t = {t}: min(-grad q . N) = {min:.6e} < {floor:.6e}")]
    TaylorViolation { t: f64, min: f64, floor: f64 },
    #[error("explicit step unstable: dt = {dt:.3e} exceeds bound {bound:.3e}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("fixed-point iteration stopped contracting at n = {n} (ratios {ratios:?})")]
    NoContraction { n: usize, ratios: Vec<f64> },
    #[error("non-finite values produced by {0}")]
    NonFinite(&'static str),
    #[error("snapshot format: {0}")]
    Format(String),
    #[error("series: {0}")]
    Series(String),
    #[error("config line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
