use thiserror::Error;

/// Errors raised by model construction, simulation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `r <= alpha`: the open loop already settles below the reference, pellets add nothing.
    #[error("reference r = {r} must exceed pellet increment alpha = {alpha}")]
    RNotAboveAlpha { r: f64, alpha: f64 },

    #[error("parameter `{name}` must be > 0 (got {value})")]
    NonPositiveParam { name: &'static str, value: f64 },

    #[error("parameter `{name}` must be >= 0 (got {value})")]
    NegativeParam { name: &'static str, value: f64 },

    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },

    #[error("gas-gun actuator requires a positive preparation time")]
    GasGunWithoutPrep,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("jump requested with timer {timer} but tick period is {t_c}")]
    TickNotDue { timer: f64, t_c: f64 },

    #[error("trajectory has no samples")]
    EmptyTrajectory,

    #[error("steady-state fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),

    #[error("oracle needs at least 100 steps per tick, got {0}")]
    StepTooCoarse(u32),

    #[error("trajectories do not share a tick grid: {0}")]
    GridMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
