//! Closed-form upper bounds on the relative bias of an observed risk ratio
//! under outcome-related selection, and worst-case adjustment of estimates
//! by a computed bound.

use crate::error::Error;
use crate::estimate::{EffectEstimate, RiskRatio, UpperLimit};
use crate::scenario::{require_ge_one, Scenario, ScenarioParams};

/// The kernel `a * b / (a + b - 1)`.
///
/// For `a, b >= 1` the value lies in `[1, min(a, b)]`, equals 1 exactly when
/// either argument is 1, is symmetric, and never decreases in either
/// argument. Arguments below 1 are rejected rather than truncated.
pub fn joint_bound(a: f64, b: f64) -> Result<f64, Error> {
    require_ge_one("a", a)?;
    require_ge_one("b", b)?;
    // A unit argument collapses the quotient to 1 in exact arithmetic, but in floats
    // (a + 1) - 1 can differ from a by an ulp in either direction, so the
    // exact case is short-circuited and the max guards the near-boundary
    // region where rounding lands a hair under 1.
    if a == 1.0 || b == 1.0 {
        return Ok(1.0);
    }
    Ok((a * b / (a + b - 1.0)).max(1.0))
}

/// An upper bound on relative bias, carrying the scenario and parameters
/// that produced it. Only [`bounding_factor`] builds one, so a value always
/// matches its inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingFactor {
    value: f64,
    scenario: Scenario,
    params: ScenarioParams,
    approximate: bool,
}

impl BoundingFactor {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn params(&self) -> ScenarioParams {
        self.params
    }

    /// True when the bound rests on a substitute association parameter and
    /// is therefore plausible rather than proven.
    pub fn approximate(&self) -> bool {
        self.approximate
    }
}

/// Evaluates the bounding factor for a parameter set.
///
/// The general form multiplies one kernel per exposure stratum; tying
/// selection to the unmeasured factor replaces each kernel by its outcome
/// association alone; a shared risk direction drops the off-direction
/// stratum entirely; and the selected-population form pairs the outcome
/// association inside the selected population with the induced exposure-u
/// association there.
pub fn bounding_factor(params: ScenarioParams) -> Result<BoundingFactor, Error> {
    params.validate()?;
    let (value, approximate) = match params {
        ScenarioParams::General {
            rr_uy_a1,
            rr_su_a1,
            rr_uy_a0,
            rr_su_a0,
        } => (
            joint_bound(rr_uy_a1, rr_su_a1)? * joint_bound(rr_uy_a0, rr_su_a0)?,
            false,
        ),
        ScenarioParams::SEqualsU { rr_uy_a1, rr_uy_a0 } => (rr_uy_a1 * rr_uy_a0, false),
        ScenarioParams::Directional { rr_uy, rr_su, .. } => (joint_bound(rr_uy, rr_su)?, false),
        ScenarioParams::SEqualsUDirectional { rr_uy, .. } => (rr_uy, false),
        ScenarioParams::SelectedPopulation {
            rr_uy_s1,
            association,
        } => (
            joint_bound(rr_uy_s1, association.value())?,
            association.is_approximate(),
        ),
    };
    Ok(BoundingFactor {
        value,
        scenario: params.scenario(),
        params,
        approximate,
    })
}

/// Relative bias of an observed value against a proposed true value,
/// oriented so the ratio is at least 1. `recoded` reports that the exposure
/// coding had to be reversed, which happens exactly when the observed value
/// sits below the proposed true one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeBias {
    pub ratio: f64,
    pub recoded: bool,
}

pub fn relative_bias(observed: RiskRatio, proposed_true: RiskRatio) -> RelativeBias {
    let o = observed.value();
    let t = proposed_true.value();
    if o < t {
        RelativeBias {
            ratio: t / o,
            recoded: true,
        }
    } else {
        RelativeBias {
            ratio: o / t,
            recoded: false,
        }
    }
}

/// Divides the point and each finite confidence limit by the bound. An
/// unbounded upper limit stays unbounded and the scale tag is preserved.
/// Values may land below 1; this is worst-case correction, not truncation.
///
/// The estimate must already be in the analysis orientation (point at least
/// 1); orient protective estimates with [`relative_bias`] or
/// [`EffectEstimate::reciprocal`] first.
pub fn adjust_estimate(estimate: EffectEstimate, bound: BoundingFactor) -> EffectEstimate {
    let b = bound.value();
    let div = |r: RiskRatio| RiskRatio::raw(r.value() / b);
    // Division by a positive constant preserves the limit ordering.
    EffectEstimate::from_parts_unchecked(
        div(estimate.point()),
        estimate.lower().map(div),
        estimate.upper().map(|u| match u {
            UpperLimit::Finite(r) => UpperLimit::Finite(div(r)),
            UpperLimit::Unbounded => UpperLimit::Unbounded,
        }),
        estimate.scale(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::Scale;
    use crate::scenario::{Direction, SelectedAssociation};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rr(v: f64) -> RiskRatio {
        RiskRatio::new(v).unwrap()
    }

    fn general(uy1: f64, su1: f64, uy0: f64, su0: f64) -> ScenarioParams {
        ScenarioParams::General {
            rr_uy_a1: uy1,
            rr_su_a1: su1,
            rr_uy_a0: uy0,
            rr_su_a0: su0,
        }
    }

    fn directional(rr_uy: f64, rr_su: f64) -> ScenarioParams {
        ScenarioParams::Directional {
            direction: Direction::Increased,
            rr_uy,
            rr_su,
        }
    }

    #[test]
    fn kernel_matches_hand_computed_values() {
        // 2 * 1.7 / 2.7 and 2 * 2 / 3
        assert_relative_eq!(
            joint_bound(2.0, 1.7).unwrap(),
            1.259_259_259_259_259_3,
            max_relative = 1e-12
        );
        assert_relative_eq!(joint_bound(2.0, 2.0).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(joint_bound(2.0, 1.5).unwrap(), 1.2, max_relative = 1e-15);
    }

    #[test]
    fn kernel_collapses_to_one_when_either_argument_is_one() {
        for a in [1.0, 1.3, 2.0, 17.0, 240.0, 1e6] {
            assert_eq!(joint_bound(a, 1.0).unwrap(), 1.0);
            assert_eq!(joint_bound(1.0, a).unwrap(), 1.0);
        }
    }

    #[test]
    fn kernel_rejects_out_of_domain_arguments() {
        assert_eq!(
            joint_bound(0.9, 2.0),
            Err(Error::Parameter {
                name: "a",
                value: 0.9
            })
        );
        assert!(matches!(
            joint_bound(2.0, f64::NAN),
            Err(Error::Parameter { name: "b", .. })
        ));
        assert!(matches!(
            joint_bound(f64::INFINITY, 2.0),
            Err(Error::Parameter { name: "a", .. })
        ));
        let msg = joint_bound(0.9, 2.0).unwrap_err().to_string();
        assert!(msg.contains("reciprocal"), "error should teach the fix: {msg}");
    }

    #[test]
    fn general_bound_matches_worked_example() {
        let b = bounding_factor(general(2.0, 1.7, 2.0, 1.5)).unwrap();
        assert_relative_eq!(b.value(), 1.511_111_111_111_111_2, max_relative = 1e-12);
        assert!(!b.approximate());
        assert_eq!(b.scenario(), Scenario::General);
        assert_eq!(b.params(), general(2.0, 1.7, 2.0, 1.5));
    }

    #[test]
    fn all_unit_parameters_give_a_unit_bound() {
        assert_eq!(
            bounding_factor(general(1.0, 1.0, 1.0, 1.0)).unwrap().value(),
            1.0
        );
        assert_eq!(
            bounding_factor(ScenarioParams::SEqualsU {
                rr_uy_a1: 1.0,
                rr_uy_a0: 1.0
            })
            .unwrap()
            .value(),
            1.0
        );
        assert_eq!(bounding_factor(directional(1.0, 1.0)).unwrap().value(), 1.0);
    }

    #[test]
    fn s_equals_u_bound_is_the_product_of_outcome_associations() {
        let b = bounding_factor(ScenarioParams::SEqualsU {
            rr_uy_a1: 2.0,
            rr_uy_a0: 3.0,
        })
        .unwrap();
        assert_eq!(b.value(), 6.0);
    }

    #[test]
    fn directional_bound_is_one_kernel() {
        let b = bounding_factor(directional(2.0, 1.7)).unwrap();
        assert_relative_eq!(b.value(), 1.259_259_259_259_259_3, max_relative = 1e-12);
        let d = bounding_factor(ScenarioParams::Directional {
            direction: Direction::Decreased,
            rr_uy: 2.0,
            rr_su: 1.7,
        })
        .unwrap();
        assert_eq!(d.value(), b.value(), "the formula is direction-blind");
        assert_eq!(
            d.scenario(),
            Scenario::Directional(Direction::Decreased),
            "the tag is not"
        );
    }

    #[test]
    fn doubly_simplified_bound_is_the_parameter_itself() {
        let b = bounding_factor(ScenarioParams::SEqualsUDirectional {
            direction: Direction::Increased,
            rr_uy: 2.37,
        })
        .unwrap();
        assert_eq!(b.value(), 2.37);
    }

    #[test]
    fn selected_population_bound_evaluates_the_kernel() {
        let b = bounding_factor(ScenarioParams::SelectedPopulation {
            rr_uy_s1: 2.37,
            association: SelectedAssociation::Exact(2.37),
        })
        .unwrap();
        // 2.37^2 / (2 * 2.37 - 1) = 5.6169 / 3.74
        assert_relative_eq!(b.value(), 1.501_844_919_786_096_3, max_relative = 1e-12);
        assert!(!b.approximate());
        // Inverting the one-kernel summary formula recovers the parameter.
        assert_relative_eq!(
            crate::summary::summary_directional(b.value()).unwrap(),
            2.37,
            max_relative = 1e-12
        );
    }

    #[test]
    fn substitute_associations_mark_the_bound_approximate() {
        for association in [
            SelectedAssociation::ApproxSu(2.0),
            SelectedAssociation::ApproxSa(2.0),
        ] {
            let b = bounding_factor(ScenarioParams::SelectedPopulation {
                rr_uy_s1: 3.0,
                association,
            })
            .unwrap();
            assert_eq!(b.value(), 1.5); // 3 * 2 / 4
            assert!(b.approximate());
        }
    }

    #[test]
    fn invalid_parameters_are_rejected_by_name() {
        let err = bounding_factor(general(2.0, 1.7, 0.99, 1.5)).unwrap_err();
        assert_eq!(
            err,
            Error::Parameter {
                name: "rr-uy-a0",
                value: 0.99
            }
        );
    }

    #[test]
    fn relative_bias_orients_and_flags_recoding() {
        let b = relative_bias(rr(2.30), rr(11.98));
        assert_relative_eq!(b.ratio, 5.208_695_652_173_913, max_relative = 1e-12);
        assert!(b.recoded);

        let same = relative_bias(rr(3.3), rr(3.3));
        assert_eq!(same.ratio, 1.0);
        assert!(!same.recoded);

        let harmful = relative_bias(rr(4.0), rr(1.0));
        assert_eq!(harmful.ratio, 4.0);
        assert!(!harmful.recoded);
    }

    #[test]
    fn adjustment_divides_point_and_limits() {
        let est = EffectEstimate::new(
            rr(73.1),
            Some(rr(13.0)),
            Some(UpperLimit::Unbounded),
            Scale::OddsRatioApprox,
        )
        .unwrap();
        let bound = bounding_factor(general(2.0, 1.7, 2.0, 1.5)).unwrap();
        let adj = adjust_estimate(est, bound);
        // 73.1 / (68/45) = 48.375 and 13 / (68/45) = 585/68
        assert_relative_eq!(adj.point().value(), 48.375, max_relative = 1e-12);
        assert_relative_eq!(
            adj.lower().unwrap().value(),
            8.602_941_176_470_589,
            max_relative = 1e-12
        );
        assert_eq!(adj.upper(), Some(UpperLimit::Unbounded));
        assert_eq!(adj.scale(), Scale::OddsRatioApprox);
    }

    #[test]
    fn unit_bound_leaves_the_estimate_unchanged() {
        let est = EffectEstimate::new(
            rr(3.0),
            Some(rr(1.5)),
            Some(UpperLimit::Finite(rr(6.0))),
            Scale::RiskRatio,
        )
        .unwrap();
        let unit = bounding_factor(ScenarioParams::SEqualsUDirectional {
            direction: Direction::Increased,
            rr_uy: 1.0,
        })
        .unwrap();
        assert_eq!(adjust_estimate(est, unit), est);
    }

    #[test]
    fn adjustment_is_elementwise_division() {
        let est = EffectEstimate::new(
            rr(3.0),
            Some(rr(1.5)),
            Some(UpperLimit::Finite(rr(6.0))),
            Scale::RiskRatio,
        )
        .unwrap();
        let bound = bounding_factor(ScenarioParams::SEqualsUDirectional {
            direction: Direction::Increased,
            rr_uy: 1.5,
        })
        .unwrap();
        let adj = adjust_estimate(est, bound);
        assert_eq!(adj.point().value(), 2.0);
        assert_eq!(adj.lower().unwrap().value(), 1.0);
        assert_eq!(adj.upper(), Some(UpperLimit::Finite(rr(4.0))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(512))]

        #[test]
        fn kernel_stays_within_one_and_the_smaller_argument(
            a in 1.0..100.0f64,
            b in 1.0..100.0f64,
        ) {
            let v = joint_bound(a, b).unwrap();
            prop_assert!(v >= 1.0);
            prop_assert!(v <= a.min(b) * (1.0 + 1e-12));
        }

        #[test]
        fn kernel_is_exactly_symmetric(a in 1.0..100.0f64, b in 1.0..100.0f64) {
            prop_assert_eq!(joint_bound(a, b).unwrap(), joint_bound(b, a).unwrap());
        }

        // Bumps are either zero or macroscopic so floating-point noise cannot
        // masquerade as a monotonicity failure.
        #[test]
        fn general_bound_never_decreases_in_any_parameter(
            base in proptest::array::uniform4(1.0..50.0f64),
            bumps in proptest::array::uniform4(prop_oneof![Just(0.0), 1e-6..10.0f64]),
        ) {
            let lo = bounding_factor(general(base[0], base[1], base[2], base[3]))
                .unwrap()
                .value();
            let hi = bounding_factor(general(
                base[0] + bumps[0],
                base[1] + bumps[1],
                base[2] + bumps[2],
                base[3] + bumps[3],
            ))
            .unwrap()
            .value();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn two_parameter_bounds_never_decrease(
            a in 1.0..50.0f64,
            b in 1.0..50.0f64,
            bump_a in prop_oneof![Just(0.0), 1e-6..10.0f64],
            bump_b in prop_oneof![Just(0.0), 1e-6..10.0f64],
        ) {
            prop_assert!(
                joint_bound(a + bump_a, b + bump_b).unwrap() >= joint_bound(a, b).unwrap()
            );
            let lo = bounding_factor(ScenarioParams::SEqualsU { rr_uy_a1: a, rr_uy_a0: b })
                .unwrap()
                .value();
            let hi = bounding_factor(ScenarioParams::SEqualsU {
                rr_uy_a1: a + bump_a,
                rr_uy_a0: b + bump_b,
            })
            .unwrap()
            .value();
            prop_assert!(hi >= lo);
        }

        // One stratum's kernel can only be amplified by the other stratum's.
        #[test]
        fn directional_bound_nests_inside_the_general_bound(
            uy in 1.0..50.0f64,
            su in 1.0..50.0f64,
            other_uy in 1.0..50.0f64,
            other_su in 1.0..50.0f64,
        ) {
            let one = bounding_factor(directional(uy, su)).unwrap().value();
            let both = bounding_factor(general(uy, su, other_uy, other_su))
                .unwrap()
                .value();
            prop_assert!(both >= one);
        }

        #[test]
        fn unit_parameter_collapses_its_kernel_exactly(
            a in 1.0..100.0f64,
            uy0 in 1.0..100.0f64,
        ) {
            prop_assert_eq!(joint_bound(a, 1.0).unwrap(), 1.0);
            // With both selection associations at 1 the general bound is
            // exactly 1 regardless of the outcome associations.
            let b = bounding_factor(general(a, 1.0, uy0, 1.0)).unwrap();
            prop_assert_eq!(b.value(), 1.0);
        }

        #[test]
        fn adjustment_round_trips_through_multiplication(
            point in 1.0..1000.0f64,
            shrink in 0.01..1.0f64,
            grow in 1.0..100.0f64,
            uy in 1.0..20.0f64,
            su in 1.0..20.0f64,
        ) {
            let est = EffectEstimate::new(
                rr(point),
                Some(rr(point * shrink)),
                Some(UpperLimit::Finite(rr(point * grow))),
                Scale::RiskRatio,
            )
            .unwrap();
            let bound = bounding_factor(directional(uy, su)).unwrap();
            let adj = adjust_estimate(est, bound);
            let back = |r: RiskRatio| r.value() * bound.value();
            prop_assert!((back(adj.point()) - point).abs() <= point * 1e-12);
            let lower = est.lower().unwrap().value();
            prop_assert!((back(adj.lower().unwrap()) - lower).abs() <= lower * 1e-12);
            let upper = match est.upper().unwrap() {
                UpperLimit::Finite(r) => r.value(),
                UpperLimit::Unbounded => unreachable!(),
            };
            let adj_upper = match adj.upper().unwrap() {
                UpperLimit::Finite(r) => r.value(),
                UpperLimit::Unbounded => unreachable!(),
            };
            prop_assert!((adj_upper * bound.value() - upper).abs() <= upper * 1e-12);
        }
    }
}
