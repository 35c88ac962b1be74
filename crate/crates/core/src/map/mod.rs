//! Exact MAP inference for weighted Event Calculus theories.
//!
//! A most probable answer set maximizes the sum of weights of satisfied
//! rule groundings. Real-valued weights are first scaled to integers
//! (preserving their relative differences), then a Viterbi-style dynamic
//! program over the joint state of coupled fluent instances finds an
//! optimal trajectory/satisfied-set pair per time step. A brute-force
//! trajectory enumerator and an exhaustive weighted-semantics enumerator
//! guard the solver.

mod brute;
mod dist;
mod dp;

pub use brute::{brute_force_map, BruteForceError};
pub use dist::{enumerate_distribution, Distribution, DistributionError, World};
pub(crate) use dp::{solve, Penalty, SolveRequest};

use std::collections::BTreeMap;

use crate::interp::{InferredState, Interpretation};
use crate::kernel::{
    evaluate_body, ground_candidates, trajectories_to_state, FluentTrajectory, GroundInstance,
    Theory,
};
use crate::logic::{Rule, RuleId};
use crate::Weight;

/// Default scaling constant `K`.
pub const DEFAULT_K: u32 = 1000;

/// Smallest weight distance considered distinct when computing the scaling
/// factor; protects the integer range against near-identical weights.
const MIN_DISTANCE: f64 = 1e-6;

/// Integer rule weights obtained by scaling real weights with `K / d_min`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledWeights {
    pub factor: f64,
    pub per_rule: BTreeMap<RuleId, i64>,
}

impl ScaledWeights {
    pub fn weight(&self, id: RuleId) -> i64 {
        *self.per_rule.get(&id).unwrap_or(&0)
    }

    /// The integer equivalent of real weight 1.0: the unit in which the
    /// induction optimizer prices true-state disagreements.
    pub fn unit_cost(&self) -> i64 {
        round_half_away(self.factor)
    }
}

fn round_half_away(x: f64) -> i64 {
    // f64::round rounds half away from zero
    x.round() as i64
}

/// Scales rule weights to integers by `K / d_min`, where `d_min` is the
/// smallest nonzero pairwise weight distance; if all weights are equal the
/// factor is `K`. Rounding is half away from zero.
pub fn scale_weights(rules: &[Rule], k: u32) -> ScaledWeights {
    let mut d_min: Option<f64> = None;
    for (i, a) in rules.iter().enumerate() {
        for b in &rules[i + 1..] {
            let d = (a.weight - b.weight).abs();
            if d > 0.0 {
                d_min = Some(match d_min {
                    Some(cur) => cur.min(d),
                    None => d,
                });
            }
        }
    }
    let factor = match d_min {
        Some(d) => f64::from(k) / d.max(MIN_DISTANCE),
        None => f64::from(k),
    };
    let per_rule = rules
        .iter()
        .map(|r| (r.id, round_half_away(r.weight * factor)))
        .collect();
    ScaledWeights { factor, per_rule }
}

/// Trajectories of every tracked fluent instance, the satisfied rule
/// groundings, and the integer objective (the sum of satisfied scaled
/// weights).
#[derive(Clone, Debug)]
pub struct MapResult {
    pub trajectories: Vec<FluentTrajectory>,
    pub satisfied: Vec<GroundInstance>,
    pub objective: i64,
}

impl MapResult {
    pub fn inferred_state(&self, interp: &Interpretation) -> InferredState {
        trajectories_to_state(&self.trajectories, interp.t_start(), interp.t_end())
    }
}

/// Exact MAP inference: a trajectory/satisfied-set pair of globally maximal
/// objective. Deterministic: among equal-objective solutions it prefers
/// fewer true holdsAt values, then the per-transition weight-maximal
/// satisfied choice with ties broken by (time, rule id, substitution).
pub fn map_inference(theory: &Theory, interp: &Interpretation, scaled: &ScaledWeights) -> MapResult {
    let soft = ground_theory(theory.rules(), interp, scaled);
    let solution = solve(&SolveRequest {
        soft: &soft,
        hard: &[],
        penalty: None,
        interp,
        focus: None,
    });
    MapResult {
        trajectories: solution.trajectories,
        satisfied: solution.satisfied,
        objective: solution.objective,
    }
}

/// Grounds every rule and attaches its scaled integer weight.
pub(crate) fn ground_theory(
    rules: &[Rule],
    interp: &Interpretation,
    scaled: &ScaledWeights,
) -> Vec<(GroundInstance, i64)> {
    rules
        .iter()
        .flat_map(|r| {
            let w = scaled.weight(r.id);
            ground_candidates(r, interp).into_iter().map(move |g| (g, w))
        })
        .collect()
}

/// Re-derives everything a [`MapResult`] claims and checks it:
/// trajectories must equal crisp propagation of the satisfied set from the
/// initial state, every satisfied instance's body must hold under the
/// trajectories, and the objective must equal the satisfied weight sum.
pub fn validate_map_result(
    theory: &Theory,
    interp: &Interpretation,
    scaled: &ScaledWeights,
    result: &MapResult,
) -> Result<(), String> {
    let state = trajectories_to_state(&result.trajectories, interp.t_start(), interp.t_end());
    for g in &result.satisfied {
        if !evaluate_body(g, interp, &state) {
            return Err(format!("satisfied instance body not true: {g:?}"));
        }
        if theory.rule(g.rule_id).is_none() {
            return Err(format!("satisfied instance of unknown rule {:?}", g.rule_id));
        }
    }
    let objective: i64 = result.satisfied.iter().map(|g| scaled.weight(g.rule_id)).sum();
    if objective != result.objective {
        return Err(format!(
            "objective {} != satisfied weight sum {}",
            result.objective, objective
        ));
    }
    // trajectories must follow the axioms given the satisfied set
    for tr in &result.trajectories {
        let f = &tr.fluent;
        let initial = interp.initial_state().contains(f);
        if tr.values[0] != initial {
            return Err(format!("trajectory of {f:?} does not start at the initial state"));
        }
        for (i, pair) in tr.values.windows(2).enumerate() {
            let t = interp.t_start() + i as crate::Time;
            let initiated = result
                .satisfied
                .iter()
                .any(|g| g.initiates && g.time == t && g.head_fluent == *f);
            let terminated = result
                .satisfied
                .iter()
                .any(|g| !g.initiates && g.time == t && g.head_fluent == *f);
            let expected = initiated || (pair[0] && !terminated);
            if pair[1] != expected {
                return Err(format!(
                    "trajectory of {f:?} inconsistent at t={t}: have {}, axioms give {expected}",
                    pair[1]
                ));
            }
        }
    }
    Ok(())
}

/// Real-weight objective of a satisfied set, for cross-checks against the
/// enumerated distribution.
pub fn real_objective(theory: &Theory, satisfied: &[GroundInstance]) -> Weight {
    satisfied
        .iter()
        .map(|g| theory.rule(g.rule_id).map(|r| r.weight).unwrap_or(0.0))
        .sum()
}
