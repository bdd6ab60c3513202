use thiserror::Error;

use crate::quadrature::QuadratureError;
use crate::scenario::ValidationErrors;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationErrors),

    #[error("quadrature failed in {context}: {source}")]
    Quadrature {
        context: &'static str,
        #[source]
        source: QuadratureError,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("total outage at the lowest MCS threshold; demand undefined")]
    TotalOutage,

    #[error("unbounded; singular no-interference case")]
    UnboundedRate,

    #[error("no accessible channels")]
    NoAccessibleChannels,

    #[error(
        "activity solver exceeded {iterations} iterations; bracket [{lo}, {hi}], residual {residual:e}"
    )]
    SolverNotConverged {
        iterations: usize,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn quad(context: &'static str) -> impl FnOnce(QuadratureError) -> Self {
        move |source| Error::Quadrature { context, source }
    }

    /// True for failures of a numerical routine rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::SolverNotConverged { .. }
        )
    }
}
