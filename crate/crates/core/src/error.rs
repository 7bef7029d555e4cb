use thiserror::Error;

/// Which marginal of a contingency table made a measure undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    /// Real-class proportion (column sum).
    Prevalence,
    /// Predicted-class proportion (row sum).
    Bias,
}

impl std::fmt::Display for Marginal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Marginal::Prevalence => write!(f, "prevalence"),
            Marginal::Bias => write!(f, "bias"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input is empty")]
    EmptyInput,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("class index {index} out of range for {k} classes")]
    ClassOutOfRange { index: usize, k: usize },

    #[error("feature index {index} out of range for {d} features")]
    FeatureOutOfRange { index: usize, d: usize },

    #[error("at least two classes are required, got {0}")]
    TooFewClasses(usize),

    #[error("weight at position {index} is invalid ({value})")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weights sum to zero")]
    ZeroTotalWeight,

    #[error("class {class} has degenerate {marginal} {value}")]
    Degenerate {
        class: usize,
        marginal: Marginal,
        value: f64,
    },

    #[error("expected chance accuracy is 1; kappa is undefined")]
    ChanceAccuracyIsOne,

    #[error(
        "informedness ({informedness}) and markedness ({markedness}) differ in sign; correlation is undefined"
    )]
    MixedSign { informedness: f64, markedness: f64 },

    #[error("{name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected} inputs, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("feature {feature} of instance {instance} is not binary ({value})")]
    NonBinaryFeature {
        instance: usize,
        feature: usize,
        value: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("association for feature {feature} and class {class} is undefined: {reason}")]
    UndefinedAssociation {
        feature: usize,
        class: usize,
        reason: &'static str,
    },

    #[error("measure {measure} undefined in boosting round {round}: {source}")]
    UndefinedMeasure {
        measure: String,
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ensemble has no members")]
    EmptyEnsemble,

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    ParseFeature {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("row {row}: unknown label {label:?}")]
    UnknownLabel { row: usize, label: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
