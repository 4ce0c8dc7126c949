use thiserror::Error;

/// Broad classes of failure, used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: bad spectrum text, non-normalized weights, bad arguments.
    Invalid,
    /// A well-formed request outside the domain the model covers.
    Domain,
    /// A request that would exceed a work or stability bound.
    Resource,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid energy law: {0}")]
    InvalidLaw(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("inverse temperature {0} is negative; only beta >= 0 is supported")]
    NegativeBeta(f64),

    #[error("energy {energy} exceeds the mean {mean}; reaching it requires negative temperature")]
    AboveMean { energy: f64, mean: f64 },

    #[error("energy {energy} is not reachable at any finite temperature (ground {ground})")]
    Unreachable { energy: f64, ground: f64 },

    #[error("energy {energy} is outside the admissible interval ({lower}, {upper})")]
    OutOfRange { energy: f64, lower: f64, upper: f64 },

    #[error("completeness probe {epsilon} must lie above the ground energy {ground}")]
    InvalidProbe { epsilon: f64, ground: f64 },

    #[error("atom energies are not commensurate on a lattice")]
    Incommensurate,

    #[error("exact convolution needs {work} cell updates, above the limit {limit}")]
    WorkBound { work: u128, limit: u128 },

    #[error("method not applicable to this law: {0}")]
    WrongLaw(String),

    #[error("molecule count {n} exceeds the stable limit {limit} for this method")]
    TooManyMolecules { n: usize, limit: usize },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidSpectrum(_) | Error::InvalidLaw(_) | Error::InvalidArgument(_) => {
                ErrorKind::Invalid
            }
            Error::WorkBound { .. } | Error::TooManyMolecules { .. } => ErrorKind::Resource,
            _ => ErrorKind::Domain,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
