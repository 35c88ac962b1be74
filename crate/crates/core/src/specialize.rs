//! Online hill-climbing specialization of rules down the subsumption
//! lattice of their bottom rules, gated by Hoeffding tests over normalized
//! information gain.

use std::sync::Arc;

use num_traits::Float;

use crate::induction::BottomRule;
use crate::interp::{FluentState, Interpretation};
use crate::kernel::validate_rule;
use crate::logic::{theta_equivalent, Literal, Rule, RuleId};
use crate::weights::{adagrad_update, count_groundings, count_true_groundings, UpdateContext};
use crate::Weight;

/// True/false grounding counts of a rule in the MAP-inferred states seen so
/// far.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GainStats {
    pub true_groundings: u64,
    pub false_groundings: u64,
}

impl GainStats {
    pub fn total(&self) -> u64 {
        self.true_groundings + self.false_groundings
    }
}

/// Normalized information gain of a specialization over its parent:
/// `G(r, r') = P_r (ln P_r/(P_r+N_r) − ln P_r'/(P_r'+N_r'))`, clamped below
/// at zero and divided by `G_max = P_r' · (−ln P_r'/(P_r'+N_r'))`. Degenerate
/// cases (child never fires, parent already precise) resolve to zero, so the
/// result is always in `[0, 1]`.
pub fn information_gain<F: Float>(child: GainStats, parent: GainStats) -> F {
    let (p, n) = (child.true_groundings, child.false_groundings);
    let (pp, np) = (parent.true_groundings, parent.false_groundings);
    if p == 0 || pp == 0 || pp + np == 0 {
        return F::zero();
    }
    let child_precision = F::from(p).unwrap() / F::from(p + n).unwrap();
    let parent_precision = F::from(pp).unwrap() / F::from(pp + np).unwrap();
    let g_max = F::from(pp).unwrap() * -parent_precision.ln();
    if g_max <= F::zero() {
        return F::zero();
    }
    let raw = F::from(p).unwrap() * (child_precision.ln() - parent_precision.ln());
    (raw / g_max).max(F::zero()).min(F::one())
}

/// Hoeffding bound `ε = sqrt(ln(1/δ) / 2N)`; infinite when nothing has been
/// observed yet.
pub fn hoeffding_epsilon<F: Float>(delta: F, n: u64) -> F {
    if n == 0 {
        return F::infinity();
    }
    ((F::one() / delta).ln() / (F::from(2 * n).unwrap())).sqrt()
}

/// A candidate specialization: the parent plus one literal from its bottom
/// rule.
#[derive(Clone, Debug)]
pub struct ChildCandidate {
    pub rule: Rule,
    /// Index of the added literal in the bottom rule's lifted body.
    pub added: usize,
}

/// Hill-climbing state of one top rule: its bottom rule, which bottom
/// literals the rule currently uses, and the candidate one-literal
/// extensions with their independently learned weights and statistics.
#[derive(Clone, Debug, Default)]
pub struct SpecializationSlot {
    pub bottom: Option<Arc<BottomRule>>,
    pub selected: Vec<usize>,
    pub children: Vec<ChildCandidate>,
}

/// Assembles the rule selecting `indices` (sorted) from the bottom rule's
/// lifted body.
pub fn assemble_from_bottom(
    bottom: &BottomRule,
    indices: &[usize],
    id: RuleId,
    weight: Weight,
) -> Rule {
    let body: Vec<Literal> = indices
        .iter()
        .map(|&i| bottom.lifted.body[i].clone())
        .collect();
    let mut rule = Rule::new(id, bottom.lifted.head.clone(), body, weight);
    rule.bottom = None; // set by the caller when it owns the Arc
    rule
}

impl SpecializationSlot {
    /// Builds the slot for a rule assembled from `selected` bottom-rule
    /// literals: one child per unused literal, skipping unsafe assemblies
    /// and θ-equivalent duplicates. Children start at the configured
    /// initial weight; ids are drawn from `next_id`.
    pub fn new(
        bottom: Option<Arc<BottomRule>>,
        selected: Vec<usize>,
        parent: &Rule,
        initial_weight: Weight,
        next_id: &mut u64,
    ) -> Self {
        let mut slot = SpecializationSlot {
            bottom: bottom.clone(),
            selected: selected.clone(),
            children: Vec::new(),
        };
        let Some(bottom) = bottom else {
            return slot;
        };
        for idx in 0..bottom.body_len() {
            if selected.contains(&idx) {
                continue;
            }
            let mut indices = selected.clone();
            indices.push(idx);
            indices.sort_unstable();
            let mut rule =
                assemble_from_bottom(&bottom, &indices, RuleId(*next_id), initial_weight);
            rule.parent = Some(parent.id);
            rule.bottom = Some(bottom.clone());
            if validate_rule(&rule).is_err() {
                continue;
            }
            if theta_equivalent(&rule, parent) {
                continue;
            }
            if slot
                .children
                .iter()
                .any(|c| theta_equivalent(&c.rule, &rule))
            {
                continue;
            }
            *next_id += 1;
            slot.children.push(ChildCandidate { rule, added: idx });
        }
        slot
    }
}

/// Accumulates gain statistics from the parent-only MAP state and learns
/// child weights simultaneously: the parent's and each child's true/false
/// groundings in the MAP state advance their stats, and each child takes an
/// AdaGrad step on its own subgradient against the true state.
pub fn update_gain_stats(
    parent: &mut Rule,
    slot: &mut SpecializationSlot,
    interp: &Interpretation,
    map_state: &FluentState,
    true_state: &FluentState,
    ctx: &UpdateContext<Weight>,
) {
    let (pt, pf) = count_groundings(parent, interp, map_state);
    parent.stats.map_true += pt;
    parent.stats.map_false += pf;
    for child in &mut slot.children {
        let (ct, cf) = count_groundings(&child.rule, interp, map_state);
        child.rule.stats.map_true += ct;
        child.rule.stats.map_false += cf;
        let g_map = count_true_groundings(&child.rule, interp, map_state) as i64;
        let g_true = count_true_groundings(&child.rule, interp, true_state) as i64;
        let (w, sum) = adagrad_update(
            child.rule.weight,
            child.rule.stats.grad_sq_sum,
            (g_map - g_true) as Weight,
            ctx,
        );
        child.rule.weight = w;
        child.rule.stats.grad_sq_sum = sum;
        child.rule.stats.observations += interp.window_len() as u64;
    }
}

/// Runs the Hoeffding test on a slot: when the best child's gain beats the
/// second best by more than `ε = sqrt(ln(1/δ)/2N)` (N the parent's
/// observation count) and is itself positive, the best child's index is
/// returned as the replacement. With fewer than two candidates the best is
/// compared against gain zero.
pub fn try_specialize(parent: &Rule, slot: &SpecializationSlot, delta: Weight) -> Option<usize> {
    if slot.children.is_empty() {
        return None;
    }
    let parent_stats = GainStats {
        true_groundings: parent.stats.map_true,
        false_groundings: parent.stats.map_false,
    };
    let gains: Vec<Weight> = slot
        .children
        .iter()
        .map(|c| {
            information_gain(
                GainStats {
                    true_groundings: c.rule.stats.map_true,
                    false_groundings: c.rule.stats.map_false,
                },
                parent_stats,
            )
        })
        .collect();
    let mut best = 0usize;
    for (i, g) in gains.iter().enumerate() {
        if *g > gains[best] {
            best = i;
        }
    }
    let second = gains
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != best)
        .map(|(_, g)| *g)
        .fold(0.0, f64::max);
    let eps = hoeffding_epsilon(delta, parent.stats.observations);
    if gains[best] > 0.0 && gains[best] - second > eps {
        Some(best)
    } else {
        None
    }
}
