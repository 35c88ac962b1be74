//! Exhaustive enumeration of the weighted-program distribution on
//! desk-scale instances: every consistent choice of satisfied rule
//! groundings is a candidate world whose weight is the exponentiated sum of
//! its rules' real-valued weights, normalized into a probability.
//!
//! Independent of the solver's case analysis: worlds are checked by direct
//! forward propagation of the inertia axioms.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::interp::Interpretation;
use crate::kernel::{ground_candidates, GroundInstance, Theory};
use crate::logic::Term;
use crate::{Time, Weight};

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("too many candidate groundings to enumerate: {0}")]
    TooManyGroundings(usize),
}

const MAX_GROUNDINGS: usize = 20;

/// One candidate interpretation: a consistent satisfied set and the fluent
/// truth it induces over `[t_start, t_end + 1]`.
#[derive(Clone, Debug)]
pub struct World {
    pub satisfied: Vec<GroundInstance>,
    pub holds: BTreeSet<(Term, Time)>,
    /// Sum of the satisfied rules' real weights.
    pub score: Weight,
}

/// Probability distribution over candidate worlds.
#[derive(Clone, Debug)]
pub struct Distribution {
    pub worlds: Vec<(World, Weight)>,
}

impl Distribution {
    pub fn total_probability(&self) -> Weight {
        self.worlds.iter().map(|(_, p)| p).sum()
    }

    /// Most probable world; ties resolve to the earliest in enumeration
    /// order.
    pub fn argmax(&self) -> &World {
        let mut best = &self.worlds[0];
        for w in &self.worlds[1..] {
            if w.1 > best.1 {
                best = w;
            }
        }
        &best.0
    }

    pub fn max_score(&self) -> Weight {
        self.worlds
            .iter()
            .map(|(w, _)| w.score)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Enumerates all candidate worlds of the weighted theory on the
/// interpretation and normalizes their weights into probabilities.
pub fn enumerate_distribution(
    theory: &Theory,
    interp: &Interpretation,
) -> Result<Distribution, DistributionError> {
    let insts: Vec<(GroundInstance, Weight)> = theory
        .rules()
        .iter()
        .flat_map(|r| {
            let w = r.weight;
            ground_candidates(r, interp).into_iter().map(move |g| (g, w))
        })
        .collect();
    if insts.len() > MAX_GROUNDINGS {
        return Err(DistributionError::TooManyGroundings(insts.len()));
    }

    let mut fluents: BTreeSet<Term> = interp.initial_state().clone();
    for (g, _) in &insts {
        fluents.insert(g.head_fluent.clone());
        fluents.extend(g.holds_conditions.iter().map(|(f, _)| f.clone()));
    }

    let mut worlds: Vec<World> = Vec::new();
    for mask in 0u64..(1u64 << insts.len()) {
        let selected: Vec<usize> = (0..insts.len()).filter(|i| mask >> i & 1 == 1).collect();
        if let Some(world) = propagate(&selected, &insts, interp, &fluents) {
            worlds.push(world);
        }
    }
    let z: Weight = worlds.iter().map(|w| w.score.exp()).sum();
    let worlds = worlds
        .into_iter()
        .map(|w| {
            let p = w.score.exp() / z;
            (w, p)
        })
        .collect();
    Ok(Distribution { worlds })
}

/// Forward-propagates the axioms under a fixed satisfied set. Returns
/// `None` when some selected instance's body is false under the resulting
/// trajectory (the choice rule could not have produced it).
fn propagate(
    selected: &[usize],
    insts: &[(GroundInstance, Weight)],
    interp: &Interpretation,
    fluents: &BTreeSet<Term>,
) -> Option<World> {
    let mut holds: BTreeSet<(Term, Time)> = BTreeSet::new();
    let mut current: BTreeSet<Term> = interp.initial_state().clone();
    for f in &current {
        holds.insert((f.clone(), interp.t_start()));
    }
    for t in interp.t_start()..=interp.t_end() {
        let mut initiated: BTreeSet<&Term> = BTreeSet::new();
        let mut terminated: BTreeSet<&Term> = BTreeSet::new();
        for &i in selected {
            let g = &insts[i].0;
            if g.time != t {
                continue;
            }
            if !g.body_true_under(|f| current.contains(f)) {
                return None;
            }
            if g.initiates {
                initiated.insert(&g.head_fluent);
            } else {
                terminated.insert(&g.head_fluent);
            }
        }
        let mut next: BTreeSet<Term> = BTreeSet::new();
        for f in fluents {
            if initiated.contains(f) || (current.contains(f) && !terminated.contains(f)) {
                next.insert(f.clone());
            }
        }
        for f in &next {
            holds.insert((f.clone(), t + 1));
        }
        current = next;
    }
    let score: Weight = selected.iter().map(|&i| insts[i].1).sum();
    Some(World {
        satisfied: selected.iter().map(|&i| insts[i].0.clone()).collect(),
        holds,
        score,
    })
}
