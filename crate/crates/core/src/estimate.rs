use crate::error::Error;

/// A positive, finite relative effect on the ratio scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskRatio(f64);

impl RiskRatio {
    /// Validates that `value` is positive and finite.
    pub fn new(value: f64) -> Result<Self, Error> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::RiskRatio { value })
        }
    }

    /// Crate-internal constructor for values positive by construction.
    pub(crate) fn raw(value: f64) -> Self {
        debug_assert!(
            value.is_finite() && value > 0.0,
            "internal risk ratio {value} is not positive and finite"
        );
        Self(value)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Measurement scale of a reported estimate. Odds and hazard ratios are
/// treated as approximations of the risk ratio; the tag travels with the
/// estimate so output can say what was actually adjusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    RiskRatio,
    OddsRatioApprox,
    HazardRatioApprox,
}

/// An upper confidence limit, possibly reported as unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperLimit {
    Finite(RiskRatio),
    Unbounded,
}

/// A point estimate with optional confidence limits, ordered
/// `lower <= point <= upper` for whichever limits are present.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    point: RiskRatio,
    lower: Option<RiskRatio>,
    upper: Option<UpperLimit>,
    scale: Scale,
}

impl EffectEstimate {
    pub fn new(
        point: RiskRatio,
        lower: Option<RiskRatio>,
        upper: Option<UpperLimit>,
        scale: Scale,
    ) -> Result<Self, Error> {
        let lower_ok = lower.is_none_or(|l| l.value() <= point.value());
        let upper_ok = match upper {
            Some(UpperLimit::Finite(u)) => point.value() <= u.value(),
            _ => true,
        };
        if !(lower_ok && upper_ok) {
            return Err(Error::LimitsOutOfOrder {
                lower: lower.map(RiskRatio::value),
                point: point.value(),
                upper: match upper {
                    Some(UpperLimit::Finite(u)) => Some(u.value()),
                    _ => None,
                },
            });
        }
        Ok(Self {
            point,
            lower,
            upper,
            scale,
        })
    }

    /// Constructor for limits whose ordering is guaranteed by the caller,
    /// such as division of an already valid estimate by a positive constant.
    pub(crate) fn from_parts_unchecked(
        point: RiskRatio,
        lower: Option<RiskRatio>,
        upper: Option<UpperLimit>,
        scale: Scale,
    ) -> Self {
        Self {
            point,
            lower,
            upper,
            scale,
        }
    }

    pub fn point(&self) -> RiskRatio {
        self.point
    }

    pub fn lower(&self) -> Option<RiskRatio> {
        self.lower
    }

    pub fn upper(&self) -> Option<UpperLimit> {
        self.upper
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// The exposure-recoded view of the estimate: reciprocal point with the
    /// confidence limits swapped. An unbounded upper limit has no positive
    /// reciprocal, so the recoded lower limit is absent in that case, and an
    /// absent limit stays absent.
    pub fn reciprocal(self) -> Self {
        let inv = |r: RiskRatio| RiskRatio::raw(1.0 / r.value());
        let lower = match self.upper {
            Some(UpperLimit::Finite(u)) => Some(inv(u)),
            Some(UpperLimit::Unbounded) | None => None,
        };
        let upper = self.lower.map(|l| UpperLimit::Finite(inv(l)));
        Self::from_parts_unchecked(inv(self.point), lower, upper, self.scale)
    }
}
