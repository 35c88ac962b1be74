//! New-rule generation from prediction mistakes: abductive head seeding,
//! bottom-rule construction, θ-subsumption compression, and the joint
//! optimization that selects minimal rule fragments best approximating the
//! true state given the existing weighted theory.

mod bottom;
mod search;

pub use bottom::{compress_bottom_rules, generate_bottom_rule, BottomRule, BottomRuleError};
pub use search::{induce_new_rules, InductionConfig, InductionOutcome, SelectionAssignment};

use std::collections::BTreeSet;

use crate::interp::{FluentState, InferredState};
use crate::logic::{Atom, Term, INITIATED, TERMINATED};
use crate::Time;

/// Kind of an erroneous prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MistakeKind {
    /// In the true state but not the inferred one.
    FalseNegative,
    /// In the inferred state but not the true one.
    FalsePositive,
}

/// One erroneous holdsAt prediction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mistake {
    pub fluent: Term,
    pub time: Time,
    pub kind: MistakeKind,
}

/// Symmetric difference of the true and inferred states over the scored
/// range, in deterministic (time, fluent) order.
pub fn diff_states(truth: &FluentState, inferred: &InferredState) -> Vec<Mistake> {
    let true_atoms = truth.scored_set();
    let inferred_atoms = inferred.scored_set();
    let mut out: Vec<Mistake> = Vec::new();
    for (f, t) in true_atoms.difference(&inferred_atoms) {
        out.push(Mistake {
            fluent: f.clone(),
            time: *t,
            kind: MistakeKind::FalseNegative,
        });
    }
    for (f, t) in inferred_atoms.difference(&true_atoms) {
        out.push(Mistake {
            fluent: f.clone(),
            time: *t,
            kind: MistakeKind::FalsePositive,
        });
    }
    out.sort_by(|a, b| (a.time, &a.fluent, a.kind).cmp(&(b.time, &b.fluent, b.kind)));
    out
}

/// Abduces ground head seeds that would eliminate the mistakes: an FN at
/// time `t` whose predecessor is false in the true state yields
/// `initiatedAt(f, t-1)`; an FP whose predecessor is true in the true state
/// yields `terminatedAt(f, t-1)`. Duplicates are merged.
///
/// The true state is reconstructed from the inferred state and the mistake
/// set (truth = prediction xor mistake).
pub fn abduce_heads(
    mistakes: &[Mistake],
    inferred: &InferredState,
    _observations_window: (Time, Time),
) -> BTreeSet<Atom> {
    let mistake_set: BTreeSet<(Term, Time)> = mistakes
        .iter()
        .map(|m| (m.fluent.clone(), m.time))
        .collect();
    let true_at = |f: &Term, t: Time| -> bool {
        let predicted = inferred.holds(f, t);
        if mistake_set.contains(&(f.clone(), t)) {
            !predicted
        } else {
            predicted
        }
    };
    let mut seeds = BTreeSet::new();
    for m in mistakes {
        let prev = m.time - 1;
        if prev < inferred.t_start() {
            continue;
        }
        match m.kind {
            MistakeKind::FalseNegative => {
                if !true_at(&m.fluent, prev) {
                    seeds.insert(Atom::new(
                        INITIATED,
                        vec![m.fluent.clone(), Term::constant(prev.to_string())],
                    ));
                }
            }
            MistakeKind::FalsePositive => {
                if true_at(&m.fluent, prev) {
                    seeds.insert(Atom::new(
                        TERMINATED,
                        vec![m.fluent.clone(), Term::constant(prev.to_string())],
                    ));
                }
            }
        }
    }
    seeds
}
