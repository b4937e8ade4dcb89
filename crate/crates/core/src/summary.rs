//! Summary measures: the joint parameter strength that would just move an
//! oriented risk ratio to a target value, one closed form per scenario.
//!
//! Each formula inverts its scenario's bounding factor along the diagonal
//! where every parameter is equal, so the reported number reads as "all
//! sensitivity parameters this large could explain the gap, anything smaller
//! could not".

use crate::bounds::relative_bias;
use crate::error::Error;
use crate::estimate::{EffectEstimate, RiskRatio, UpperLimit};
use crate::scenario::Scenario;

fn check_oriented(rr: f64) -> Result<(), Error> {
    if rr.is_finite() && rr >= 1.0 {
        Ok(())
    } else {
        Err(Error::SummaryInput { value: rr })
    }
}

/// Inverts the two-kernel bound with all four parameters equal:
/// `sqrt(rr) + sqrt(rr - sqrt(rr))`.
pub fn summary_general(rr: f64) -> Result<f64, Error> {
    check_oriented(rr)?;
    let s = rr.sqrt();
    Ok(s + (rr - s).sqrt())
}

/// Inverts the product of the two outcome associations with both equal:
/// `sqrt(rr)`.
pub fn summary_s_equals_u(rr: f64) -> Result<f64, Error> {
    check_oriented(rr)?;
    Ok(rr.sqrt())
}

/// Inverts a single kernel with both parameters equal:
/// `rr + sqrt(rr * (rr - 1))`.
pub fn summary_directional(rr: f64) -> Result<f64, Error> {
    check_oriented(rr)?;
    Ok(rr + (rr * (rr - 1.0)).sqrt())
}

/// The bound already equals its single parameter, so the summary is the
/// ratio itself.
pub fn summary_s_equals_u_directional(rr: f64) -> Result<f64, Error> {
    check_oriented(rr)?;
    Ok(rr)
}

/// What the estimate is being moved to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// The null, a risk ratio of 1.
    Null,
    /// A proposed true value.
    TrueValue(RiskRatio),
}

impl Target {
    fn value(self) -> RiskRatio {
        match self {
            Target::Null => RiskRatio::raw(1.0),
            Target::TrueValue(v) => v,
        }
    }
}

/// Which value of the estimate the summary applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitChoice {
    Point,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AppliedTo {
    Point,
    CiLimit,
}

/// A computed summary measure together with everything needed to read it:
/// the scenario formula used, the oriented ratio it was applied to, the
/// target, which value of the estimate was summarized, and whether the
/// comparison had to be exposure-recoded to orient it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryMeasure {
    pub value: f64,
    pub scenario: Scenario,
    pub input_rr: f64,
    pub target: Target,
    pub applied_to: AppliedTo,
    pub recoded: bool,
}

/// Computes the scenario's summary for one value of an estimate against a
/// target. The chosen value is compared to the target with [`relative_bias`],
/// which orients the ratio and records whether recoding was needed; the
/// scenario formula then runs on the oriented ratio.
///
/// A summary of the estimate against itself is exactly 1.
pub fn summary_for(
    scenario: Scenario,
    estimate: &EffectEstimate,
    target: Target,
    limit: LimitChoice,
) -> Result<SummaryMeasure, Error> {
    let chosen = match limit {
        LimitChoice::Point => estimate.point(),
        LimitChoice::Lower => estimate
            .lower()
            .ok_or(Error::MissingLimit { which: "lower" })?,
        LimitChoice::Upper => match estimate
            .upper()
            .ok_or(Error::MissingLimit { which: "upper" })?
        {
            UpperLimit::Finite(r) => r,
            UpperLimit::Unbounded => return Err(Error::UnboundedLimit),
        },
    };
    let oriented = relative_bias(chosen, target.value());
    let value = match scenario {
        Scenario::General => summary_general(oriented.ratio)?,
        Scenario::SEqualsU => summary_s_equals_u(oriented.ratio)?,
        Scenario::Directional(_) | Scenario::SelectedPopulation => {
            summary_directional(oriented.ratio)?
        }
        Scenario::SEqualsUDirectional(_) => summary_s_equals_u_directional(oriented.ratio)?,
    };
    Ok(SummaryMeasure {
        value,
        scenario,
        input_rr: oriented.ratio,
        target,
        applied_to: match limit {
            LimitChoice::Point => AppliedTo::Point,
            _ => AppliedTo::CiLimit,
        },
        recoded: oriented.recoded,
    })
}
