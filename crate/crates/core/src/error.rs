use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Protection and measurement fields cancel exactly (xi = 1, gamma = pi),
    /// so the total field has no direction.
    #[error("degenerate field: total magnetic field vanishes, no eigenbasis is selected")]
    DegenerateField,

    #[error("no closed form for {0} coupling")]
    UnsupportedProfile(&'static str),

    #[error("propagation did not converge after {steps} steps (last change {change:e})")]
    Convergence { steps: usize, change: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("required gradient is infinite (cos gamma = 0)")]
    InfiniteGradient,

    #[error("invalid profile table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
