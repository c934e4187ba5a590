use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("no-crossing: trace never falls below 1/e")]
    NoCrossing,
    #[error("not-normalized: first value {0} is not within 1 +/- 0.05")]
    NotNormalized(f64),
    #[error("solver did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("no-rotation: one-period propagator is the identity, axis undefined")]
    NoRotation,
    #[error("too few nonempty bins: {0} (need at least 10)")]
    TooFewBins(usize),
    #[error("budget exceeded: estimated cost {cost:.3e} > budget {budget:.3e}")]
    BudgetExceeded { cost: f64, budget: f64 },
    #[error("window too short: {0}")]
    WindowTooShort(String),
    #[error("fourier tail energy fraction {0:.3e} exceeds 1e-3")]
    TailEnergy(f64),
    #[error("euler reconstruction mismatch {0:.3e}")]
    Reconstruction(f64),
    #[error("slice {label}: {source}")]
    Slice {
        label: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn in_slice(self, label: impl std::fmt::Display) -> Self {
        Error::Slice { label: label.to_string(), source: Box::new(self) }
    }

    /// The innermost error, with slice annotations stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Slice { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
