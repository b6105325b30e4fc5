use thiserror::Error;

/// Errors raised by the model, pricer, calibrator and data layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument left the domain where the closed-form transform exists.
    #[error("domain violation in component {component}: Re(u) = {value} outside ({lower}, {upper})")]
    DomainViolation {
        component: usize,
        lower: f64,
        upper: f64,
        value: f64,
    },

    /// Domain failure inside a composite transform, tagged with the failing condition.
    #[error("{condition}: {source}")]
    ConditionViolated {
        condition: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),

    #[error("no admissible damping parameter: {0}")]
    Contour(String),

    #[error("quadrature did not converge: tail estimate {tail:e} above tolerance {tolerance:e} at U = {upper}")]
    Quadrature {
        tail: f64,
        tolerance: f64,
        upper: f64,
    },

    #[error("no implied volatility: {0}")]
    NoSolution(String),

    #[error("root not bracketed at index {index}: {reason}")]
    RootBracket { index: usize, reason: String },

    #[error("negative forward rate implied at tenor index {index}")]
    NegativeForward { index: usize },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("calibration stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("schema error in {file}: {message}")]
    Schema { file: String, message: String },

    #[error("validation error in {file} at row {row}: {message}")]
    Validation {
        file: String,
        row: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn in_condition(self, condition: &'static str) -> Error {
        Error::ConditionViolated {
            condition,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: impl Into<String>) -> Error {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// True when the error is a domain violation, possibly wrapped in a condition tag.
    pub fn is_domain(&self) -> bool {
        match self {
            Error::DomainViolation { .. } => true,
            Error::ConditionViolated { source, .. } => source.is_domain(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
