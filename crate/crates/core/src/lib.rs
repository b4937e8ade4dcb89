//! Sensitivity analysis for selection bias in ratio-scale effect estimates.
//!
//! When an analysis is restricted to a selected subset (study volunteers,
//! survivors, responders, linked records), the observed risk ratio can
//! differ from the one that would have been seen without the restriction.
//! This crate bounds that distortion from a handful of sensitivity
//! parameters: maximal risk-ratio associations between an unmeasured factor
//! and selection, and between that factor and the outcome. The bound
//! divides into the estimate and its confidence limits to give worst-case
//! adjusted values, and a summary measure reports, for any estimate, the
//! smallest parameter magnitude that could move it to the null or to any
//! other target.
//!
//! Five assumption sets are supported, from no assumptions beyond the
//! factor's existence down to selection being entirely determined by it,
//! with or without a known direction of effect on outcome risk; a fifth
//! targets the effect within the selected population itself. See
//! [`ScenarioParams`] for the parameterizations and [`bounding_factor`] for
//! the bounds.
//!
//! The [`oracle`] module checks the bounds against exactly represented
//! joint distributions, both by bulk random sampling and by hill-climb
//! search for near-extremal cases.

pub mod bounds;
pub mod error;
pub mod estimate;
pub mod oracle;
pub mod scenario;
pub mod summary;

pub use bounds::{
    adjust_estimate, bounding_factor, joint_bound, relative_bias, BoundingFactor, RelativeBias,
};
pub use error::Error;
pub use estimate::{EffectEstimate, RiskRatio, Scale, UpperLimit};
pub use scenario::{Direction, Scenario, ScenarioParams, SelectedAssociation};
pub use summary::{
    summary_directional, summary_for, summary_general, summary_s_equals_u,
    summary_s_equals_u_directional, AppliedTo, LimitChoice, SummaryMeasure, Target,
};
