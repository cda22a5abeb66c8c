use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("interval length must be at least one step")]
    EmptyInterval,

    #[error("unknown zone class `{0}` (expected commercial, office or residential)")]
    UnknownZoneClass(String),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("heat pump sign convention violated: {0}")]
    SignConvention(String),

    #[error("battery state of charge {soc} kWh outside [0, {capacity}] kWh")]
    CapacityViolation { soc: f64, capacity: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("regressor matrix is rank deficient; offending columns: {}", columns.join(", "))]
    Identifiability { columns: Vec<String> },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("FIT index is undefined for a constant reference series")]
    ConstantSeries,

    #[error("AR(2) coefficients ({a1}, {a2}) are not stable")]
    UnstableNoise { a1: f64, a2: f64 },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("DR requests {first} and {second} overlap")]
    OverlappingRequests { first: usize, second: usize },

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed record at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
