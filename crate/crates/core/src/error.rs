use thiserror::Error;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error("radial functions are sampled on different grids")]
    GridMismatch,
    #[error("non-finite sample at node {0}")]
    NonFinite(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("shooting parameter must be positive (got {0})")]
    NonPositiveShot(f64),
    #[error("no zero of the shot profile up to r = {r_max} (a = {a})")]
    NoZeroFound { a: f64, r_max: f64 },
    #[error("cannot bracket radius {radius} with the shooting map")]
    BracketFailure { radius: f64 },
    #[error("shooting map R0(a)*m(a) is not monotone near a = {a}")]
    NonMonotoneShooting { a: f64 },
    #[error("self-consistent iteration stagnated after {iterations} steps (residual {residual:e})")]
    ScfStagnation { iterations: usize, residual: f64 },
    #[error("input solution is not converged (residual {residual:e} > {tol:e})")]
    Unconverged { residual: f64, tol: f64 },
    #[error("requested {k} eigenpairs from an operator of dimension {dim}")]
    TooManyEigenpairs { k: usize, dim: usize },
    #[error("eigensolver did not converge (worst residual {residual:e})")]
    EigenNotConverged { residual: f64 },
    #[error("operator is singular at the requested shift")]
    Singular,
    #[error("operation requires Dirichlet boundary treatment")]
    NeedsDirichlet,
    #[error("overlap <phi|phi_R'> = {0:e} is degenerate")]
    DegenerateOverlap(f64),
    #[error("energy gap {gap:e} is negative at distance {distance:e}")]
    NegativeGap { gap: f64, distance: f64 },
    #[error("remainder at machine precision")]
    MachinePrecisionFloor,
    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("sweep rows are not monotone in the radius")]
    NonMonotoneRows,
    #[error("function is not supported inside the ball")]
    SupportViolation,
}

pub type Result<T> = core::result::Result<T, Error>;
