use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p = {p} and q = {q} are not coprime")]
    NotCoprime { p: i64, q: u64 },

    #[error("modulus {0} is outside the supported range 1..=1000000")]
    ModulusOutOfRange(u64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge within {intervals} intervals (estimated error {error:e})")]
    QuadratureFailed { intervals: usize, error: f64 },

    #[error("tolerance {requested:e} not achievable: tail bound is {bound:e} at n_max = {n_max}")]
    ToleranceNotAchievable { requested: f64, bound: f64, n_max: u64 },

    #[error("rate fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("at r = {r}: {source}")]
    AtRadius {
        r: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for failures of a numerical tolerance rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::QuadratureFailed { .. } | Error::ToleranceNotAchievable { .. } => true,
            Error::AtRadius { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
