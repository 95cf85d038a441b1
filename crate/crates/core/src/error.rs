use thiserror::Error;

/// Errors produced by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n = {0}: explicit harmonic bases are built for n in {{3, 4, 5}}")]
    UnsupportedDimension(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("quadrature cannot resolve the request: {0}")]
    Precision(String),

    #[error("operator needs at least {min} arguments, got {got}")]
    Arity { min: usize, got: usize },

    #[error("no constant radial solution exists in the {0} regime")]
    NoConstantSolution(String),

    #[error("trajectory reached the degenerate-ellipticity boundary |xi_t| = 1 near t = {t}")]
    SingularTrajectory { t: f64 },

    #[error("operation requires the {expected} regime, got {got}")]
    WrongRegime { expected: String, got: String },

    #[error("profile is not periodic: {0}")]
    Classification(String),

    #[error("fit window too short: {0}")]
    InsufficientRange(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("signal below noise floor: {0}")]
    NoiseFloor(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Floquet multipliers too close to classify (|mu1| = {0}, |mu2| = {1})")]
    AmbiguousFloquet(f64, f64),

    #[error("cone condition sigma_{j} > 0 violated at t = {t} (value {value})")]
    ConeViolation { j: usize, t: f64, value: f64 },

    #[error("Newton iteration did not converge: {0}")]
    NonConvergence(String),

    #[error("supersolution condition failed at truncation {0}; increase the mode cutoff")]
    SupersolutionCutoff(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
