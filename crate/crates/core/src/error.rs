use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("user index {index} out of range for a scenario with {count} users")]
    UserOutOfRange { index: usize, count: usize },

    #[error("decision profile has {got} entries but the scenario has {expected} users")]
    ProfileLength { got: usize, expected: usize },

    #[error("{users} users exceeds the exhaustive enumeration cap of {cap}")]
    CapacityExceeded { users: usize, cap: usize },

    #[error("wireless access is not homogeneous: P*H of user {user} is {value:e}, expected {expected:e}")]
    NotHomogeneous { user: usize, value: f64, expected: f64 },

    #[error("largest threshold ratio L/K is {ratio}; no beneficial cloud group exists and the all-local profile is the equilibrium")]
    NoBeneficialGroup { ratio: f64 },

    #[error("malformed decision profile `{0}`: expected a string of 0/1")]
    MalformedProfile(String),

    #[error("mechanism run with seed {seed} failed: {reason}")]
    MechanismFailed { seed: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Stable identifier for machine-readable error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::UserOutOfRange { .. } => "user_out_of_range",
            Error::ProfileLength { .. } => "profile_length",
            Error::CapacityExceeded { .. } => "capacity_exceeded",
            Error::NotHomogeneous { .. } => "not_homogeneous",
            Error::NoBeneficialGroup { .. } => "no_beneficial_group",
            Error::MalformedProfile(_) => "malformed_profile",
            Error::MechanismFailed { .. } => "mechanism_failed",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
