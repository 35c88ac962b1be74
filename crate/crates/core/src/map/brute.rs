//! Brute-force MAP oracle: enumerates every boolean trajectory per fluent
//! instance and, for each joint trajectory, computes the best consistent
//! satisfied set via the same per-transition case analysis the solver uses.
//! It differs from the solver in the search itself: exhaustive enumeration
//! instead of dynamic programming.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::dp::{extract_choice, trans_score, Agg, CandRef};
use super::{MapResult, ScaledWeights};
use crate::interp::Interpretation;
use crate::kernel::{ground_candidates, FluentTrajectory, GroundInstance, Theory};
use crate::logic::Term;

#[derive(Debug, Error, PartialEq)]
pub enum BruteForceError {
    #[error("instance exceeds enumeration bounds: {fluents} fluents over {window} time points")]
    TooLarge { fluents: usize, window: usize },
}

const MAX_WINDOW: usize = 14;
const MAX_FLUENTS: usize = 3;
const MAX_FREE_BITS: usize = 26;

/// Exhaustive-search MAP. Same contract as `map_inference`, restricted to
/// desk-scale instances.
pub fn brute_force_map(
    theory: &Theory,
    interp: &Interpretation,
    scaled: &ScaledWeights,
) -> Result<MapResult, BruteForceError> {
    let insts: Vec<(GroundInstance, i64)> = theory
        .rules()
        .iter()
        .flat_map(|r| {
            let w = scaled.weight(r.id);
            ground_candidates(r, interp).into_iter().map(move |g| (g, w))
        })
        .collect();

    let mut fluent_set: BTreeSet<Term> = interp.initial_state().clone();
    for (g, _) in &insts {
        fluent_set.insert(g.head_fluent.clone());
        fluent_set.extend(g.holds_conditions.iter().map(|(f, _)| f.clone()));
    }
    let fluents: Vec<Term> = fluent_set.into_iter().collect();
    let n = fluents.len();
    let steps = interp.window_len();
    if steps > MAX_WINDOW || n > MAX_FLUENTS || n * steps > MAX_FREE_BITS {
        return Err(BruteForceError::TooLarge {
            fluents: n,
            window: steps,
        });
    }
    let local: BTreeMap<&Term, usize> = fluents.iter().enumerate().map(|(i, f)| (f, i)).collect();

    let t_start = interp.t_start();
    let mut step_cands: Vec<Vec<CandRef>> = vec![Vec::new(); steps];
    let mut flat: Vec<GroundInstance> = Vec::new();
    let mut sorted: Vec<&(GroundInstance, i64)> = insts.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    for (g, w) in sorted {
        let mut pos_mask = 0u32;
        let mut neg_mask = 0u32;
        for (f, want) in &g.holds_conditions {
            let bit = 1u32 << local[f];
            if *want {
                pos_mask |= bit;
            } else {
                neg_mask |= bit;
            }
        }
        step_cands[(g.time - t_start) as usize].push(CandRef {
            inst: flat.len(),
            fluent: local[&g.head_fluent],
            init: g.initiates,
            weight: *w,
            pos_mask,
            neg_mask,
        });
        flat.push(g.clone());
    }

    let mut s0: u32 = 0;
    for (i, f) in fluents.iter().enumerate() {
        if interp.initial_state().contains(f) {
            s0 |= 1 << i;
        }
    }

    let free_bits = n * steps;
    let mut best: Option<((i64, i64), Vec<u32>)> = None;
    let state_mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
    for counter in 0u64..(1u64 << free_bits) {
        let mut path = Vec::with_capacity(steps + 1);
        path.push(s0);
        for step in 0..steps {
            path.push(((counter >> (step * n)) & state_mask) as u32);
        }
        let mut total = 0i64;
        let mut feasible = true;
        let mut true_count = i64::from(s0.count_ones());
        'steps: for step in 0..steps {
            let s = path[step];
            let snext = path[step + 1];
            true_count += i64::from(snext.count_ones());
            let aggs = compute_aggs(&step_cands[step], s, n);
            for fi in 0..n {
                let cur = s >> fi & 1 == 1;
                let on = snext >> fi & 1 == 1;
                match trans_score(cur, on, &aggs[fi]) {
                    Some(x) => total += x,
                    None => {
                        feasible = false;
                        break 'steps;
                    }
                }
            }
        }
        if !feasible {
            continue;
        }
        let value = (total, -true_count);
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, path));
        }
    }

    let (_, path) = best.expect("the inertia trajectory is always feasible");
    let mut chosen: Vec<usize> = Vec::new();
    for step in 0..steps {
        let s = path[step];
        let snext = path[step + 1];
        let aggs = compute_aggs(&step_cands[step], s, n);
        for fi in 0..n {
            let cur = s >> fi & 1 == 1;
            let on = snext >> fi & 1 == 1;
            extract_choice(cur, on, &aggs[fi], &step_cands[step], s, fi, &mut chosen);
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    let mut satisfied: Vec<GroundInstance> = chosen.iter().map(|&i| flat[i].clone()).collect();
    satisfied.sort();
    let weight_of = |g: &GroundInstance| scaled.weight(g.rule_id);
    let objective = satisfied.iter().map(weight_of).sum();

    let trajectories = fluents
        .iter()
        .enumerate()
        .map(|(fi, f)| FluentTrajectory {
            fluent: f.clone(),
            t_start,
            values: path.iter().map(|s| s >> fi & 1 == 1).collect(),
        })
        .collect();

    Ok(MapResult {
        trajectories,
        satisfied,
        objective,
    })
}

fn compute_aggs(cands: &[CandRef], state: u32, n: usize) -> Vec<Agg> {
    let mut aggs = vec![Agg::default(); n];
    for c in cands {
        if c.body_true(state) {
            aggs[c.fluent].add_soft(c.init, c.weight);
        }
    }
    aggs
}
