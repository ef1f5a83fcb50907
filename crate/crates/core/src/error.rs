use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameter `{key}`: {reason}")]
    InvalidModel { key: &'static str, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids do not match ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("non-finite aggregate state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("negative density {value} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("CFL violated: c*dt/dx = {courant} > 1")]
    Cfl { courant: f64 },

    #[error("operation not defined for velocity law {0}")]
    UnsupportedMode(&'static str),

    #[error("invalid aggregate state: {0}")]
    InvalidState(String),

    #[error("need at least {needed} aggregates, got {got}")]
    TooFewAggregates { needed: usize, got: usize },

    #[error("every cell mass is below the particle threshold")]
    EmptyDiscretization,

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("invalid time stepping: {0}")]
    InvalidTime(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
