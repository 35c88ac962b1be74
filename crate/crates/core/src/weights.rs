//! AdaGrad weight updates driven by the divergence between the MAP-inferred
//! and the true state.
//!
//! For each rule the per-batch subgradient is
//! `Δg = trueGroundings(MAP state) − trueGroundings(true state)`: positive
//! when the rule is responsible for false positives (weight demoted),
//! negative when it could retrieve false negatives (weight promoted). The
//! update is
//!
//! `w' = sign(w − (η/C)·Δg) · max{0, |w − (η/C)·Δg| − λη/C}`
//!
//! with `C = δ + sqrt(Σ_j Δg_j²)`, the sum including the current step.

use num_traits::Float;

use crate::interp::{FluentState, Interpretation};
use crate::kernel::{evaluate_body, ground_candidates};
use crate::logic::Rule;
use crate::Weight;

/// Hyperparameters of the update rule.
#[derive(Clone, Copy, Debug)]
pub struct UpdateContext<F: Float> {
    /// Learning rate η.
    pub eta: F,
    /// Regularization λ.
    pub lambda: F,
    /// Divisor guard δ.
    pub delta: F,
}

impl<F: Float> UpdateContext<F> {
    pub fn new(eta: F, lambda: F, delta: F) -> Self {
        debug_assert!(eta > F::zero());
        debug_assert!(lambda >= F::zero());
        debug_assert!(delta >= F::zero());
        UpdateContext { eta, lambda, delta }
    }
}

impl Default for UpdateContext<Weight> {
    fn default() -> Self {
        UpdateContext {
            eta: 1.0,
            lambda: 0.01,
            delta: 1.0,
        }
    }
}

fn sign<F: Float>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else if x < F::zero() {
        -F::one()
    } else {
        F::zero()
    }
}

/// One AdaGrad step. Returns the new weight and the updated squared-gradient
/// accumulator.
pub fn adagrad_update<F: Float>(
    weight: F,
    grad_sq_sum: F,
    delta_g: F,
    ctx: &UpdateContext<F>,
) -> (F, F) {
    let new_sum = grad_sq_sum + delta_g * delta_g;
    let c = ctx.delta + new_sum.sqrt();
    let step = weight - ctx.eta / c * delta_g;
    let shrunk = step.abs() - ctx.lambda * ctx.eta / c;
    let new_weight = sign(step) * shrunk.max(F::zero());
    (new_weight, new_sum)
}

/// Counts groundings of `rule` whose body is true under (observations,
/// `state`) and whose head is consistent with `state`: for initiation rules
/// the head fluent holds at `t + 1`, for termination rules it does not.
pub fn count_true_groundings(rule: &Rule, interp: &Interpretation, state: &FluentState) -> u64 {
    count_groundings(rule, interp, state).0
}

/// `(true, false)` grounding counts: body-true instances split by head
/// consistency.
pub fn count_groundings(
    rule: &Rule,
    interp: &Interpretation,
    state: &FluentState,
) -> (u64, u64) {
    let mut true_count = 0;
    let mut false_count = 0;
    for g in ground_candidates(rule, interp) {
        if !evaluate_body(&g, interp, state) {
            continue;
        }
        let head_holds = state.holds(&g.head_fluent, g.time + 1);
        if head_holds == g.initiates {
            true_count += 1;
        } else {
            false_count += 1;
        }
    }
    (true_count, false_count)
}

/// Per-rule subgradient and AdaGrad step over a whole batch. Weights and
/// gradient accumulators are updated in place; `observations` advances by
/// the window length.
pub fn batch_weight_update(
    rules: &mut [Rule],
    interp: &Interpretation,
    map_state: &FluentState,
    true_state: &FluentState,
    ctx: &UpdateContext<Weight>,
) {
    for rule in rules.iter_mut() {
        let g_map = count_true_groundings(rule, interp, map_state) as i64;
        let g_true = count_true_groundings(rule, interp, true_state) as i64;
        let delta_g = (g_map - g_true) as Weight;
        let (w, sum) = adagrad_update(rule.weight, rule.stats.grad_sq_sum, delta_g, ctx);
        rule.weight = w;
        rule.stats.grad_sq_sum = sum;
        rule.stats.observations += interp.window_len() as u64;
    }
}
