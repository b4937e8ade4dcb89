use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Whether selection is taken to raise or lower outcome risk, in both
/// exposure groups at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Increased,
    Decreased,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increased => "increased",
            Direction::Decreased => "decreased",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "increased" => Ok(Direction::Increased),
            "decreased" => Ok(Direction::Decreased),
            _ => Err(Error::Parse {
                what: "direction",
                input: s.to_string(),
                expected: "increased, decreased",
            }),
        }
    }
}

/// How the exposure-u association induced inside the selected population is
/// supplied: as the association itself, or through a substitute ratio that
/// makes the resulting bound approximate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectedAssociation {
    /// Ratio of the most common u level among the selected exposed to the
    /// least common among the selected unexposed.
    Exact(f64),
    /// Substitute selection-u association, when the exposure-u association
    /// inside the selected population is not available.
    ApproxSu(f64),
    /// Substitute selection-exposure association, same caveat.
    ApproxSa(f64),
}

impl SelectedAssociation {
    pub fn value(self) -> f64 {
        match self {
            SelectedAssociation::Exact(v)
            | SelectedAssociation::ApproxSu(v)
            | SelectedAssociation::ApproxSa(v) => v,
        }
    }

    /// Substitute ratios yield bounds that are plausible rather than proven.
    pub fn is_approximate(self) -> bool {
        !matches!(self, SelectedAssociation::Exact(_))
    }

    pub fn param_name(self) -> &'static str {
        match self {
            SelectedAssociation::Exact(_) => "rr-au-s1",
            SelectedAssociation::ApproxSu(_) => "approx-su",
            SelectedAssociation::ApproxSa(_) => "approx-sa",
        }
    }
}

/// Sensitivity parameters, one variant per analysis scenario. Every value is
/// a max/min probability ratio and must be finite and at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioParams {
    /// No structural assumption: outcome-association and selection-association
    /// parameters for both exposure strata.
    General {
        rr_uy_a1: f64,
        rr_su_a1: f64,
        rr_uy_a0: f64,
        rr_su_a0: f64,
    },
    /// Selection is determined by the unmeasured factor itself, so only the
    /// two outcome associations matter.
    SEqualsU { rr_uy_a1: f64, rr_uy_a0: f64 },
    /// Selection shifts outcome risk the same way in both exposure groups;
    /// a single stratum's parameters suffice (the exposed stratum when risk
    /// is increased, the unexposed stratum when decreased).
    Directional {
        direction: Direction,
        rr_uy: f64,
        rr_su: f64,
    },
    /// Both simplifications at once; the single outcome association is the
    /// entire bound.
    SEqualsUDirectional { direction: Direction, rr_uy: f64 },
    /// The effect inside the selected population is the target; the bound
    /// pairs the outcome association there with the induced exposure-u
    /// association.
    SelectedPopulation {
        rr_uy_s1: f64,
        association: SelectedAssociation,
    },
}

pub(crate) fn require_ge_one(name: &'static str, value: f64) -> Result<(), Error> {
    if value.is_finite() && value >= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter { name, value })
    }
}

impl ScenarioParams {
    /// Checks every parameter against the finite, at-least-1 domain, naming
    /// the offending parameter on failure.
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            ScenarioParams::General {
                rr_uy_a1,
                rr_su_a1,
                rr_uy_a0,
                rr_su_a0,
            } => {
                require_ge_one("rr-uy-a1", rr_uy_a1)?;
                require_ge_one("rr-su-a1", rr_su_a1)?;
                require_ge_one("rr-uy-a0", rr_uy_a0)?;
                require_ge_one("rr-su-a0", rr_su_a0)
            }
            ScenarioParams::SEqualsU { rr_uy_a1, rr_uy_a0 } => {
                require_ge_one("rr-uy-a1", rr_uy_a1)?;
                require_ge_one("rr-uy-a0", rr_uy_a0)
            }
            ScenarioParams::Directional { rr_uy, rr_su, .. } => {
                require_ge_one("rr-uy", rr_uy)?;
                require_ge_one("rr-su", rr_su)
            }
            ScenarioParams::SEqualsUDirectional { rr_uy, .. } => require_ge_one("rr-uy", rr_uy),
            ScenarioParams::SelectedPopulation {
                rr_uy_s1,
                association,
            } => {
                require_ge_one("rr-uy-s1", rr_uy_s1)?;
                require_ge_one(association.param_name(), association.value())
            }
        }
    }

    pub fn scenario(&self) -> Scenario {
        match *self {
            ScenarioParams::General { .. } => Scenario::General,
            ScenarioParams::SEqualsU { .. } => Scenario::SEqualsU,
            ScenarioParams::Directional { direction, .. } => Scenario::Directional(direction),
            ScenarioParams::SEqualsUDirectional { direction, .. } => {
                Scenario::SEqualsUDirectional(direction)
            }
            ScenarioParams::SelectedPopulation { .. } => Scenario::SelectedPopulation,
        }
    }
}

/// Tag naming the assumption set an analysis runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    General,
    SEqualsU,
    Directional(Direction),
    SEqualsUDirectional(Direction),
    SelectedPopulation,
}

pub(crate) const SCENARIO_NAMES: &str =
    "general, s-equals-u, directional-increased, directional-decreased, \
     s-equals-u-directional, selected";

impl Scenario {
    /// The direction constraint the scenario carries, if any.
    pub fn direction(self) -> Option<Direction> {
        match self {
            Scenario::Directional(d) | Scenario::SEqualsUDirectional(d) => Some(d),
            _ => None,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::General => "general",
            Scenario::SEqualsU => "s-equals-u",
            Scenario::Directional(Direction::Increased) => "directional-increased",
            Scenario::Directional(Direction::Decreased) => "directional-decreased",
            Scenario::SEqualsUDirectional(_) => "s-equals-u-directional",
            Scenario::SelectedPopulation => "selected",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    /// Accepts the canonical kebab-case names. The bare s-equals-u-directional
    /// name defaults to the increased direction; callers that support both pass
    /// the direction separately.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "general" => Ok(Scenario::General),
            "s-equals-u" => Ok(Scenario::SEqualsU),
            "directional-increased" => Ok(Scenario::Directional(Direction::Increased)),
            "directional-decreased" => Ok(Scenario::Directional(Direction::Decreased)),
            "s-equals-u-directional" => {
                Ok(Scenario::SEqualsUDirectional(Direction::Increased))
            }
            "selected" => Ok(Scenario::SelectedPopulation),
            _ => Err(Error::Parse {
                what: "scenario",
                input: s.to_string(),
                expected: SCENARIO_NAMES,
            }),
        }
    }
}
