use thiserror::Error;

use crate::tdf::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs at least 3 points, got {0}")]
    GridTooShort(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("not an admissible tail dependence function: {0}")]
    Inadmissible(ValidationReport),

    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter {what}: {reason}")]
    Parameter { what: &'static str, reason: String },

    #[error("invalid estimator configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("data error at row {row}: {reason}")]
    DataRow { row: usize, reason: String },

    #[error("infeasible constraints: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("misaligned window dates in reports: {}", .0.join(", "))]
    Alignment(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            domain,
        }
    }

    pub(crate) fn parameter(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            what,
            reason: reason.into(),
        }
    }
}
