use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("component mismatch: {0}")]
    ComponentMismatch(String),
    #[error("shell index {q} outside [-1, {q_max}]")]
    ShellOutOfRange { q: i32, q_max: i32 },
    #[error("invalid cutoff profile: {0}")]
    InvalidCutoff(String),
    #[error("invalid exponents: {0}")]
    InvalidExponent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite sample values")]
    NonFinite,
    #[error("coarse density min {min:e} <= 0 at Q = {q}; Q too small for this density contrast")]
    NonPositiveCoarseDensity { q: i32, min: f64 },
    #[error("density must be bounded away from zero: min rho = {min:e}, max rho = {max:e}")]
    DensityBounds { min: f64, max: f64 },
    #[error("velocity is not divergence-free: max |k.u_hat| / |u_hat| = {ratio:e}")]
    NotDivergenceFree { ratio: f64 },
    #[error("pressure is required but absent")]
    MissingPressure,
    #[error("need at least 2 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("inconsistent snapshot series: {0}")]
    InconsistentSeries(String),
    #[error("lag {0:?} does not leave room for its neighbours on the lattice")]
    LagGridBoundary(Vec<i64>),
    #[error("unsupported dimension: {0}")]
    Dimension(String),
    #[error("CFL violation: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error(
        "pressure iteration did not converge after {iterations} iterations \
         (residual {residual:e}, contraction factor {contraction:.3})"
    )]
    PressureDivergence {
        iterations: usize,
        residual: f64,
        contraction: f64,
    },
}

impl Error {
    /// True for failures of the numerics (as opposed to invalid input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite
                | Error::NonPositiveCoarseDensity { .. }
                | Error::NotDivergenceFree { .. }
                | Error::CflViolation { .. }
                | Error::PressureDivergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
