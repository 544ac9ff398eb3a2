use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate contact at x = {x}: first and second Lie derivatives both vanish")]
    DegenerateContact { x: f64 },

    #[error("point x = {x} lies in a sliding region (X+f * X-f < 0), which is not modelled")]
    Sliding { x: f64 },

    #[error("point x = {x} is a tangency of only one of the two fields")]
    SingleTangency { x: f64 },

    #[error("point ({x}, {y}) is not on the invariant set")]
    OffInvariantSet { x: f64, y: f64 },

    #[error("symbol {symbol} is not admissible here (previous arc: {from:?})")]
    Inadmissible { from: Option<usize>, symbol: usize },

    #[error("prescribed itinerary exhausted at t = {t}")]
    PrescriptionExhausted { t: f64 },

    #[error("time {t} is outside the trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("trajectory is not anchored at a branch point at t = {t}")]
    Unanchored { t: f64 },

    #[error("power iteration did not converge after {iterations} iterations (bracket gap {gap:e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("degenerate fit: slope {slope}, r^2 = {r_squared} below 0.99")]
    PoorFit { slope: f64, r_squared: f64 },

    #[error("{what}: |{value} - {target}| exceeds {tolerance}")]
    ToleranceExceeded {
        what: &'static str,
        value: f64,
        target: f64,
        tolerance: f64,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
