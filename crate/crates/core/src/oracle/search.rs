//! Random-restart hill climb over distribution space, driving the realized
//! bias toward its bound.
//!
//! Tables are parameterized on unconstrained coordinates (log cell weights,
//! logit conditionals), so every perturbation maps back to a valid
//! distribution and the climb never has to handle constraint violations.
//! The objective is bias over bound as computed by the batch checker; a
//! ratio near 1 is direct evidence that a bound cannot be uniformly
//! sharpened.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{uses_binary_u, verify_bound, JointDistribution, OracleReport, POSITIVITY_FLOOR};
use crate::error::Error;
use crate::scenario::Scenario;

/// Log cell weights stay within +-LOG_W_RANGE, bounding cell mass ratios at
/// exp(17) or so, far beyond where the objective still responds.
const LOG_W_RANGE: f64 = 8.5;
/// Logit conditionals stay within +-LOGIT_RANGE, approaching but not
/// reaching the positivity floor.
const LOGIT_RANGE: f64 = 20.0;
/// Evaluations per restart before reseeding the state.
const RESTART_EVERY: u64 = 2000;
/// Coordinate step sizes, mixed from coarse to fine on every move.
const STEP_SCALES: [f64; 5] = [6.0, 2.0, 0.6, 0.15, 0.03];

/// Unconstrained coordinates for one candidate table.
struct State {
    k: usize,
    /// When set, the selection table is pinned to the near-determinate
    /// pattern and carries no coordinates.
    s_frozen: bool,
    log_w: Vec<f64>,
    logit_s: Vec<f64>,
    logit_y: Vec<f64>,
}

impl State {
    fn random(k: usize, s_frozen: bool, rng: &mut ChaCha12Rng) -> Self {
        let block = |n: usize, rng: &mut ChaCha12Rng| {
            (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<f64>>()
        };
        Self {
            k,
            s_frozen,
            log_w: block(2 * k, rng),
            logit_s: if s_frozen { Vec::new() } else { block(2 * k, rng) },
            logit_y: block(2 * k, rng),
        }
    }

    fn dims(&self) -> usize {
        self.log_w.len() + self.logit_s.len() + self.logit_y.len()
    }

    /// Flat coordinate access: log weights first, then selection logits,
    /// then outcome logits.
    fn slot(&mut self, coord: usize) -> &mut f64 {
        let nw = self.log_w.len();
        let ns = self.logit_s.len();
        if coord < nw {
            &mut self.log_w[coord]
        } else if coord < nw + ns {
            &mut self.logit_s[coord - nw]
        } else {
            &mut self.logit_y[coord - nw - ns]
        }
    }

    /// Adds delta to one flat coordinate, clamping to its block's range.
    /// Returns the prior value so a rejected move can be undone exactly
    /// even when the clamp engaged.
    fn perturb(&mut self, coord: usize, delta: f64) -> f64 {
        let range = if coord < self.log_w.len() {
            LOG_W_RANGE
        } else {
            LOGIT_RANGE
        };
        let slot = self.slot(coord);
        let prior = *slot;
        *slot = (prior + delta).clamp(-range, range);
        prior
    }

    fn restore(&mut self, coord: usize, value: f64) {
        *self.slot(coord) = value;
    }

    fn build(&self) -> JointDistribution {
        let k = self.k;
        let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());
        let mut w = [vec![0.0; k], vec![0.0; k]];
        let total: f64 = self.log_w.iter().map(|&x| x.exp()).sum();
        for a in 0..2 {
            for u in 0..k {
                w[a][u] = self.log_w[a * k + u].exp() / total;
            }
        }
        let p_s = if self.s_frozen {
            let near_det = vec![POSITIVITY_FLOOR, 1.0 - POSITIVITY_FLOOR];
            [near_det.clone(), near_det]
        } else {
            let mut t = [vec![0.0; k], vec![0.0; k]];
            for a in 0..2 {
                for u in 0..k {
                    t[a][u] = sigmoid(self.logit_s[a * k + u]);
                }
            }
            t
        };
        let mut p_y = [vec![0.0; k], vec![0.0; k]];
        for a in 0..2 {
            for u in 0..k {
                p_y[a][u] = sigmoid(self.logit_y[a * k + u]);
            }
        }
        JointDistribution::new(k, w, p_s, p_y)
            .expect("coordinate ranges keep every table valid")
    }
}

/// Hunts for distributions whose bias approaches the scenario's bound,
/// spending exactly `budget` bound evaluations.
///
/// Runs a sequential hill climb with random restarts: from a random state,
/// each move bumps one random coordinate by a random amount at one of
/// several scales and keeps the move only on strict improvement. The report
/// counts every evaluated candidate as a sample; `skipped` counts
/// candidates that failed a direction requirement, and the best ratio and
/// its table are tracked across restarts. Deterministic for a given
/// (k, scenario, budget, seed).
pub fn tightness_search(
    k: usize,
    scenario: Scenario,
    budget: u64,
    seed: u64,
) -> Result<OracleReport, Error> {
    super::check_batch_args(k, scenario)?;
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let s_frozen = uses_binary_u(scenario);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut evals: u64 = 0;
    let mut skipped: u64 = 0;
    let mut violations: u64 = 0;
    let mut best_ratio = 0.0f64;
    let mut best_table: Option<JointDistribution> = None;
    'search: loop {
        let mut state = State::random(k, s_frozen, &mut rng);
        let mut current = f64::NEG_INFINITY;
        for step in 0..RESTART_EVERY {
            if step > 0 {
                let coord = rng.gen_range(0..state.dims());
                let scale = STEP_SCALES[rng.gen_range(0..STEP_SCALES.len())];
                let delta = scale * rng.gen_range(-1.0..1.0);
                let prior = state.perturb(coord, delta);
                let ratio = evaluate(&state, scenario, &mut skipped, &mut violations);
                evals += 1;
                match ratio {
                    Some(r) if r > current => {
                        current = r;
                        if r > best_ratio {
                            best_ratio = r;
                            best_table = Some(state.build());
                        }
                    }
                    _ => state.restore(coord, prior),
                }
            } else {
                let ratio = evaluate(&state, scenario, &mut skipped, &mut violations);
                evals += 1;
                if let Some(r) = ratio {
                    current = r;
                    if r > best_ratio {
                        best_ratio = r;
                        best_table = Some(state.build());
                    }
                }
            }
            if evals == budget {
                break 'search;
            }
        }
    }
    Ok(OracleReport {
        samples: evals,
        skipped,
        violations,
        max_bias_over_bound_ratio: best_ratio,
        worst_case: best_table,
        seed,
    })
}

fn evaluate(
    state: &State,
    scenario: Scenario,
    skipped: &mut u64,
    violations: &mut u64,
) -> Option<f64> {
    let d = state.build();
    match verify_bound(&d, scenario) {
        None => {
            *skipped += 1;
            None
        }
        Some(check) => {
            if !check.holds {
                *violations += 1;
            }
            Some(check.bias / check.bound)
        }
    }
}
