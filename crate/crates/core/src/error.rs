use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A physical or numerical constraint was violated. `constraint` names it.
    #[error("{constraint}: {detail}")]
    Constraint {
        constraint: &'static str,
        detail: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution blew up at t = {time}: L2 norm {norm:e} exceeds guard")]
    BlowUp { time: f64, norm: f64 },

    #[error("non-finite state at t = {time}")]
    NonFinite { time: f64 },

    #[error("CFL condition violated: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn constraint(constraint: &'static str, detail: impl Into<String>) -> Self {
        Error::Constraint {
            constraint,
            detail: detail.into(),
        }
    }

    /// Failures that depend on the realised path (blow-up, loss of
    /// finiteness, a CFL bound overtaken by the solution) rather than on
    /// the input alone.
    pub fn is_runtime_abort(&self) -> bool {
        matches!(
            self,
            Error::BlowUp { .. } | Error::NonFinite { .. } | Error::Cfl { .. }
        )
    }
}
