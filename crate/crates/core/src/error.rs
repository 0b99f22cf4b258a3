use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("weak-pumping cap exceeded: alpha^2 = {alpha_sq} > {cap}")]
    WeakPumpingCap { alpha_sq: f64, cap: f64 },

    #[error("invalid control schedule: {0}")]
    InvalidSchedule(String),

    #[error("singular linear system ({context})")]
    SingularSystem { context: &'static str },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("no root bracket found for T in [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("control out of bounds at segment {index}: {what} = {value} not in [0, {max}]")]
    ControlOutOfBounds {
        index: usize,
        what: &'static str,
        value: f64,
        max: f64,
    },

    #[error("no feasible duration found up to T = {t_max}")]
    Infeasible { t_max: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
