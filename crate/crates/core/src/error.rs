use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("invalid grain: {0}")]
    InvalidGrain(String),
    #[error("degenerate set: {0}")]
    DegenerateSet(String),
    #[error("angle out of range: {0}")]
    InvalidAngle(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("argument grids differ")]
    GridMismatch,
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),
    #[error("insufficient simulations: need alpha*(n+1) >= 1, got n={n}, alpha={alpha}")]
    InsufficientSimulations { n: usize, alpha: f64 },
    #[error("square of size {r} does not fit in the window")]
    InsufficientWindow { r: f64 },
    #[error("infeasible intensity: {0}")]
    InfeasibleIntensity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Variant name, used in error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidWindow(_) => "InvalidWindow",
            Error::InvalidRaster(_) => "InvalidRaster",
            Error::InvalidGrain(_) => "InvalidGrain",
            Error::DegenerateSet(_) => "DegenerateSet",
            Error::InvalidAngle(_) => "InvalidAngle",
            Error::InvalidInput(_) => "InvalidInput",
            Error::GridMismatch => "GridMismatch",
            Error::InsufficientSample(_) => "InsufficientSample",
            Error::InsufficientSimulations { .. } => "InsufficientSimulations",
            Error::InsufficientWindow { .. } => "InsufficientWindow",
            Error::InfeasibleIntensity(_) => "InfeasibleIntensity",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
