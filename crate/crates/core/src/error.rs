use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("Newton system is numerically singular at iteration {iteration}: {detail}")]
    SingularNewton { iteration: usize, detail: String },

    #[error("channel is not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("{component}: {source}")]
    Component {
        component: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps the error with the name of the component that produced it.
    pub fn in_component(self, component: &'static str) -> Self {
        Error::Component {
            component,
            source: Box::new(self),
        }
    }
}
