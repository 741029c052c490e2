use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A probability vector drifted outside the repair tolerance. Never
    /// expected on valid runs; indicates an implementation bug.
    #[error("numeric drift off the simplex: min entry {min:e}, sum {sum:.17}")]
    HardNumericDrift { min: f64, sum: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),

    #[error("operation requires non-trivial hyperparameters, got {0}")]
    RegimeMismatch(String),

    #[error("horizon {horizon} too short: need at least {min}")]
    HorizonTooShort { horizon: u64, min: u64 },

    #[error("eps2 = {eps2} >= 1: horizon too small for the recovery analysis")]
    Eps2TooLarge { eps2: f64 },

    #[error("trial {trial_index} (stream seed {stream_seed:#018x}) failed: {source}")]
    Trial {
        trial_index: u64,
        stream_seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips [`Error::Trial`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Trial { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
