use thiserror::Error;

use crate::model::AdmissibilityVerdict;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{function} is defined for n > 0, got n = {value}")]
    Domain { function: &'static str, value: f64 },

    #[error("no sign change while bracketing {what}")]
    BracketFailure { what: &'static str },

    #[error("inadmissible parameters: {0}")]
    Inadmissible(AdmissibilityVerdict),

    #[error("sonic singularity: h(n) vanishes near n = {n}")]
    SonicSingularity { n: f64 },

    #[error("first-integral drift {drift:e} exceeds tolerance {tolerance:e}")]
    Drift { drift: f64, tolerance: f64 },

    #[error("density stopped decreasing at xi = {xi} (n - 1 = {excess:e}) above the precision floor {floor:e}")]
    NonMonotone { xi: f64, excess: f64, floor: f64 },

    #[error("precision floor {floor:e} leaves no resolvable tail below the amplitude {amplitude:e}")]
    PrecisionFloor { floor: f64, amplitude: f64 },

    #[error("peak amplitude n* - 1 = {amplitude:e} is too small to resolve")]
    TooSmallAmplitude { amplitude: f64 },

    #[error("profile arrays are inconsistent: {0}")]
    GridMismatch(String),

    #[error("grid step {dxi} is too coarse for derivative order {order}")]
    InsufficientResolution { dxi: f64, order: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("fit needs at least {needed} usable points, found {found}")]
    DegenerateFit { needed: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by the requested parameters or configuration,
    /// as opposed to failures of the numerics.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Inadmissible(_)
                | Error::InvalidConfig(_)
                | Error::TooSmallAmplitude { .. }
        )
    }
}
