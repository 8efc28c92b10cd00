use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("ball (center {center:?}, radius {radius}) is not covered by the field's domain")]
    BallOutsideDomain { center: Vec<f64>, radius: f64 },

    #[error("polynomial is not even in y")]
    Parity,

    #[error("exact linear system is singular: {0}")]
    SingularSystem(String),

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("declared decay cannot bound the tail: {0}")]
    DecayTooSlow(String),

    #[error("no C^2 bound declared for the thin function")]
    Smoothness,

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("calibration residual {residual:e} exceeds {limit:e}")]
    CalibrationInconsistent { residual: f64, limit: f64 },

    #[error("perturbation rescaling failed: {0}")]
    CalibrationFailed(String),

    #[error("admissible radius window holds {found} radii, need at least {needed}")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("hypothesis fails at rho = {rho}, r = {r}: lhs {lhs} > rhs {rhs}")]
    HypothesisFailed { rho: f64, r: f64, lhs: f64, rhs: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
