//! Acceptance gate: one test per guaranteed behavior, checked at the stated
//! tolerance. Everything here goes through the public library API or the
//! compiled binary; nothing reaches into crate internals.

use std::process::Command;
use std::time::Instant;

use selbias::oracle::{
    self, derive_seed, sample_joint, tightness_search, verify_batch, JointDistribution,
};
use selbias::{
    adjust_estimate, bounding_factor, relative_bias, summary_directional, summary_general,
    summary_s_equals_u, summary_s_equals_u_directional, Direction, EffectEstimate, RiskRatio,
    Scale, Scenario, ScenarioParams, SelectedAssociation, UpperLimit,
};

fn assert_within(label: &str, got: f64, want: f64, tol: f64) {
    assert!(
        (got - want).abs() <= tol,
        "{label}: got {got}, want {want} +/- {tol}"
    );
}

fn assert_rel(label: &str, got: f64, want: f64, tol: f64) {
    let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
    assert!(
        rel <= tol,
        "{label}: got {got}, want {want}, relative error {rel:e} > {tol:e}"
    );
}

#[test]
fn general_bound_and_adjustment_reproduce_known_values() {
    let bound = bounding_factor(ScenarioParams::General {
        rr_uy_a1: 2.0,
        rr_su_a1: 1.7,
        rr_uy_a0: 2.0,
        rr_su_a0: 1.5,
    })
    .unwrap();
    assert_within("bounding factor", bound.value(), 1.51, 0.005);

    let estimate = EffectEstimate::new(
        RiskRatio::new(73.1).unwrap(),
        Some(RiskRatio::new(13.0).unwrap()),
        Some(UpperLimit::Unbounded),
        Scale::OddsRatioApprox,
    )
    .unwrap();
    let adjusted = adjust_estimate(estimate, bound);
    assert_within("adjusted point", adjusted.point().value(), 48.4, 0.05);
    assert_within(
        "adjusted lower",
        adjusted.lower().unwrap().value(),
        8.6,
        0.05,
    );
    assert_eq!(adjusted.upper(), Some(UpperLimit::Unbounded));
}

#[test]
fn general_summaries_reproduce_known_values() {
    assert_within("summary of 73.1", summary_general(73.1).unwrap(), 16.6, 0.05);
    assert_within("summary of 13.0", summary_general(13.0).unwrap(), 6.7, 0.05);
    assert_within("summary of 3", summary_general(3.0).unwrap(), 2.9, 0.05);
}

#[test]
fn directional_summaries_reproduce_known_values() {
    assert_within(
        "summary of 1.50",
        summary_directional(1.50).unwrap(),
        2.37,
        0.005,
    );
    assert_within(
        "summary of 1.22",
        summary_directional(1.22).unwrap(),
        1.74,
        0.005,
    );
}

#[test]
fn relative_bias_recodes_and_its_identity_summary_is_exact() {
    let observed = RiskRatio::new(2.30).unwrap();
    let proposed = RiskRatio::new(11.98).unwrap();
    let bias = relative_bias(observed, proposed);
    assert_within("relative bias", bias.ratio, 5.2, 0.05);
    assert!(bias.recoded, "a proposed value above the estimate flips the coding");
    let summary = summary_s_equals_u_directional(bias.ratio).unwrap();
    assert_eq!(summary, bias.ratio, "identity summary must be bit-exact");
}

/// Deterministic stand-in for a uniform draw on [1, 100].
fn spread_rr(seed: u64, index: u64) -> f64 {
    let unit = (derive_seed(seed, index) >> 11) as f64 / (1u64 << 53) as f64;
    1.0 + 99.0 * unit
}

#[test]
fn summaries_round_trip_through_their_bounding_factors() {
    let start = Instant::now();
    for i in 0..1000u64 {
        let rr = spread_rr(501, i);

        let s = summary_general(rr).unwrap();
        let back = bounding_factor(ScenarioParams::General {
            rr_uy_a1: s,
            rr_su_a1: s,
            rr_uy_a0: s,
            rr_su_a0: s,
        })
        .unwrap();
        assert_rel("general round trip", back.value(), rr, 1e-10);

        let s = summary_s_equals_u(rr).unwrap();
        let back = bounding_factor(ScenarioParams::SEqualsU {
            rr_uy_a1: s,
            rr_uy_a0: s,
        })
        .unwrap();
        assert_rel("s-equals-u round trip", back.value(), rr, 1e-10);

        let s = summary_directional(rr).unwrap();
        let back = bounding_factor(ScenarioParams::Directional {
            direction: Direction::Increased,
            rr_uy: s,
            rr_su: s,
        })
        .unwrap();
        assert_rel("directional round trip", back.value(), rr, 1e-10);

        let s = summary_s_equals_u_directional(rr).unwrap();
        let back = bounding_factor(ScenarioParams::SEqualsUDirectional {
            direction: Direction::Decreased,
            rr_uy: s,
        })
        .unwrap();
        assert_rel("identity round trip", back.value(), rr, 1e-10);

        let s = summary_directional(rr).unwrap();
        let back = bounding_factor(ScenarioParams::SelectedPopulation {
            rr_uy_s1: s,
            association: SelectedAssociation::Exact(s),
        })
        .unwrap();
        assert_rel("selected round trip", back.value(), rr, 1e-10);
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "round trips took {elapsed:?}, budget is 1 s"
    );
}

#[test]
fn large_sample_verification_finds_no_violations() {
    let start = Instant::now();
    let n = 100_000;

    for k in [2, 3, 4] {
        let report = verify_batch(k, Scenario::General, n, 20_000 + k as u64).unwrap();
        assert_eq!(report.violations, 0, "general bound violated at k = {k}");
        assert_eq!(report.skipped, 0, "general applies to every sample");
        assert!(report.max_bias_over_bound_ratio <= 1.0 + oracle::BIAS_TOLERANCE);
    }

    let report = verify_batch(3, Scenario::SelectedPopulation, n, 20_010).unwrap();
    assert_eq!(report.violations, 0, "selected-population bound violated");
    assert_eq!(report.skipped, 0);

    for direction in [Direction::Increased, Direction::Decreased] {
        let report = verify_batch(3, Scenario::Directional(direction), n, 20_020).unwrap();
        assert_eq!(report.violations, 0, "directional ({direction}) bound violated");
        assert!(
            report.skipped < report.samples,
            "some samples must meet the {direction} direction requirement"
        );
    }

    let report = verify_batch(2, Scenario::SEqualsU, n, 20_030).unwrap();
    assert_eq!(report.violations, 0, "selection-equals-u bound violated");

    for direction in [Direction::Increased, Direction::Decreased] {
        let report =
            verify_batch(2, Scenario::SEqualsUDirectional(direction), n, 20_040).unwrap();
        assert_eq!(report.violations, 0, "identity bound ({direction}) violated");
        assert!(report.skipped < report.samples);
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "verification took {elapsed:?}, budget is 60 s"
    );
}

/// Every joint probability spelled out, one cell per (u, a, s, y). Queries are
/// filter-and-sum so any bookkeeping error in the structured code shows up as
/// a mismatch.
struct Flat {
    cells: Vec<(usize, usize, usize, usize, f64)>,
}

impl Flat {
    fn build(d: &JointDistribution) -> Self {
        let mut cells = Vec::with_capacity(8 * d.k());
        for u in 0..d.k() {
            for a in 0..2 {
                let base = d.p_au(a, u);
                let ps = d.p_s_given_au(a, u);
                let py = d.p_y_given_au(a, u);
                for s in 0..2 {
                    let p_s = if s == 1 { ps } else { 1.0 - ps };
                    for y in 0..2 {
                        let p_y = if y == 1 { py } else { 1.0 - py };
                        cells.push((u, a, s, y, base * p_s * p_y));
                    }
                }
            }
        }
        Flat { cells }
    }

    fn mass(&self, f: impl Fn(usize, usize, usize, usize) -> bool) -> f64 {
        self.cells
            .iter()
            .filter(|&&(u, a, s, y, _)| f(u, a, s, y))
            .map(|&(_, _, _, _, p)| p)
            .sum()
    }

    fn observed_rr(&self) -> f64 {
        let risk = |arm: usize| {
            self.mass(|_, a, s, y| a == arm && s == 1 && y == 1)
                / self.mass(|_, a, s, _| a == arm && s == 1)
        };
        risk(1) / risk(0)
    }

    fn true_rr_total(&self) -> f64 {
        let risk = |arm: usize| {
            self.mass(|_, a, _, y| a == arm && y == 1) / self.mass(|_, a, _, _| a == arm)
        };
        risk(1) / risk(0)
    }

    fn true_rr_selected(&self, d: &JointDistribution) -> f64 {
        let s1 = self.mass(|_, _, s, _| s == 1);
        let risk = |arm: usize| -> f64 {
            (0..d.k())
                .map(|u| d.p_y_given_au(arm, u) * self.mass(|cu, _, s, _| cu == u && s == 1) / s1)
                .sum()
        };
        risk(1) / risk(0)
    }
}

#[test]
fn marginalizations_are_self_consistent() {
    for k in 2..=8 {
        for i in 0..400u64 {
            let d = sample_joint(k, derive_seed(9_000 + k as u64, i));
            let flat = Flat::build(&d);

            let weighted = oracle::true_rr_total(&d).value();
            let direct = oracle::true_rr_total_direct(&d).value();
            assert_rel("two true-ratio forms", weighted, direct, 1e-12);

            assert_rel(
                "observed ratio vs flat cells",
                oracle::observed_rr(&d).value(),
                flat.observed_rr(),
                1e-12,
            );
            assert_rel("true ratio vs flat cells", weighted, flat.true_rr_total(), 1e-12);
            assert_rel(
                "selected ratio vs flat cells",
                oracle::true_rr_selected(&d).value(),
                flat.true_rr_selected(&d),
                1e-12,
            );
        }
    }
}

#[test]
fn search_attains_a_nearly_tight_ratio() {
    let report = tightness_search(
        2,
        Scenario::SEqualsUDirectional(Direction::Increased),
        100_000,
        1,
    )
    .unwrap();
    assert_eq!(report.violations, 0);
    assert!(
        report.max_bias_over_bound_ratio >= 0.95,
        "search only reached bias/bound {:.4}",
        report.max_bias_over_bound_ratio
    );
}

fn run_verify(threads: &str, format: &str) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_selbias"))
        .args([
            "verify", "--scenario", "general", "--k", "2", "--n", "20000", "--seed", "7",
            "--output", format,
        ])
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("stdout is utf8"),
        out.status.code().expect("no signal"),
    )
}

#[test]
fn verification_output_is_deterministic_across_threads() {
    for format in ["text", "json"] {
        let (first, code) = run_verify("1", format);
        assert_eq!(code, 0);
        let (rerun, _) = run_verify("1", format);
        assert_eq!(first, rerun, "{format} output differs between identical runs");
        let (wide, code) = run_verify("4", format);
        assert_eq!(code, 0);
        assert_eq!(first, wide, "{format} output depends on the thread count");
    }
}
