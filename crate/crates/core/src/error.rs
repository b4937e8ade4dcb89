use thiserror::Error;

use crate::scenario::Scenario;

/// Errors raised while constructing domain values or running verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A sensitivity parameter sat below 1 or was not finite. Every parameter
    /// is a max/min probability ratio, so a value below 1 means the compared
    /// levels are swapped.
    #[error(
        "parameter {name} must be a finite value >= 1 (got {value}); each parameter is a \
         max/min ratio, so a value below 1 means the compared levels are swapped: supply \
         the reciprocal, or recode the reference level"
    )]
    Parameter { name: &'static str, value: f64 },

    #[error("risk ratio must be positive and finite (got {value})")]
    RiskRatio { value: f64 },

    #[error(
        "confidence limits must satisfy lower <= point <= upper \
         (got lower {lower:?}, point {point}, upper {upper:?})"
    )]
    LimitsOutOfOrder {
        lower: Option<f64>,
        point: f64,
        upper: Option<f64>,
    },

    #[error("the estimate has no {which} confidence limit")]
    MissingLimit { which: &'static str },

    #[error("the upper confidence limit is unbounded, so it has no finite summary")]
    UnboundedLimit,

    #[error(
        "summary input must be an oriented risk ratio >= 1 (got {value}); \
         orient the comparison with relative_bias first"
    )]
    SummaryInput { value: f64 },

    #[error("invalid joint distribution: {reason}")]
    Distribution { reason: String },

    #[error("u cardinality k must be between 2 and 8 for verification (got {0})")]
    Cardinality(usize),

    #[error("scenario {0} ties selection to a binary u; use k = 2")]
    BinaryOnly(Scenario),

    #[error("search budget must be at least 1")]
    ZeroBudget,

    #[error("unknown {what} {input:?}; expected one of: {expected}")]
    Parse {
        what: &'static str,
        input: String,
        expected: &'static str,
    },
}
