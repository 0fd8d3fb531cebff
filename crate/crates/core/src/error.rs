use std::fmt;

use harvest_milp::MilpError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("instance validation failed: {0}")]
    Validation(ValidationReport),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("exhaustive enumeration would visit {0} schedules")]
    InstanceTooLarge(f64),
    #[error("fingerprint mismatch: {0}")]
    FingerprintMismatch(String),
    #[error("robustness requires a non-empty scenario cohort")]
    EmptyCohort,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Solver(#[from] MilpError),
    #[error("{context}: {message}")]
    Format { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub fn format(context: impl Into<String>, message: impl fmt::Display) -> Self {
        CoreError::Format {
            context: context.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    EmptyInstance(&'static str),
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    NegativeVolumeStat {
        stand: usize,
        assortment: usize,
        statistic: &'static str,
        value: f64,
    },
    NonPositiveArea {
        stand: usize,
        area: f64,
    },
    NegativeDemand {
        assortment: usize,
        period: usize,
        value: f64,
    },
    BadIdentifier(String),
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::EmptyInstance(what) => write!(f, "EmptyInstance: no {what}"),
            ValidationIssue::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "DimensionMismatch: {what} has {found} entries, expected {expected}"),
            ValidationIssue::NegativeVolumeStat {
                stand,
                assortment,
                statistic,
                value,
            } => write!(
                f,
                "NegativeVolumeStat: {statistic} = {value} for assortment {assortment} in stand {stand}"
            ),
            ValidationIssue::NonPositiveArea { stand, area } => {
                write!(f, "NonPositiveArea: stand {stand} has area {area}")
            }
            ValidationIssue::NegativeDemand {
                assortment,
                period,
                value,
            } => write!(
                f,
                "NegativeDemand: {value} for assortment {assortment} in period {period}"
            ),
            ValidationIssue::BadIdentifier(msg) => write!(f, "BadIdentifier: {msg}"),
        }
    }
}

/// Every violation found in an instance, with 1-based coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_dimension_mismatch(&self) -> bool {
        self.issues
            .iter()
            .any(|i| matches!(i, ValidationIssue::DimensionMismatch { .. }))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}
