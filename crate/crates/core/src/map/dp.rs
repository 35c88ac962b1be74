//! Viterbi-style dynamic program over joint fluent-state trajectories.
//!
//! Fluent instances are partitioned into dependency groups (fluents whose
//! candidate rule groundings reference each other through holdsAt body
//! conditions). Within a group the DP state is the joint boolean assignment
//! to the group's fluents; groups are independent and solved separately.
//!
//! Per transition, the admissible satisfied choices and their best score
//! follow a case analysis on (current value, next value) and the candidate
//! initiation/termination groundings whose bodies are true under the
//! current state; hard rules (used by the induction optimizer) force their
//! heads wherever their bodies hold.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::interp::{FluentState, Interpretation};
use crate::kernel::{FluentTrajectory, GroundInstance};
use crate::logic::Term;
use crate::Time;

/// Pre-grounded solver input: weighted candidate instances with their
/// scaled integer weights, plus instances of hard rules that fire
/// unconditionally when their bodies hold.
pub(crate) struct SolveRequest<'a> {
    pub soft: &'a [(GroundInstance, i64)],
    pub hard: &'a [GroundInstance],
    pub penalty: Option<Penalty<'a>>,
    pub interp: &'a Interpretation,
    /// When set, only dependency groups containing one of these fluents are
    /// solved; the rest contribute a constant the caller does not need.
    pub focus: Option<&'a BTreeSet<Term>>,
}

/// Supervision penalty: each disagreement with `truth` over the scored
/// range costs `unit`.
pub(crate) struct Penalty<'a> {
    pub truth: &'a FluentState,
    pub unit: i64,
}

#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub trajectories: Vec<FluentTrajectory>,
    pub satisfied: Vec<GroundInstance>,
    /// Sum of satisfied scaled weights.
    pub objective: i64,
    /// Penalty units incurred over tracked fluents (0 without penalties).
    pub penalty_cost: i64,
}

const MAX_GROUP: usize = 16;

#[derive(Clone, Copy)]
pub(crate) struct CandRef {
    /// Index into the owner's instance list (soft or hard respectively).
    pub(crate) inst: usize,
    pub(crate) fluent: usize,
    pub(crate) init: bool,
    pub(crate) weight: i64,
    pub(crate) pos_mask: u32,
    pub(crate) neg_mask: u32,
}

impl CandRef {
    pub(crate) fn body_true(&self, state: u32) -> bool {
        (state & self.pos_mask) == self.pos_mask && (state & self.neg_mask) == 0
    }
}

/// Per-fluent aggregates of body-true candidates under one state.
#[derive(Clone, Copy, Default)]
pub(crate) struct Agg {
    pub(crate) init_pos_sum: i64,
    pub(crate) init_max: Option<i64>,
    pub(crate) term_pos_sum: i64,
    pub(crate) term_max: Option<i64>,
    pub(crate) hard_init: bool,
    pub(crate) hard_term: bool,
}

impl Agg {
    pub(crate) fn add_soft(&mut self, init: bool, w: i64) {
        if init {
            if w > 0 {
                self.init_pos_sum += w;
            }
            self.init_max = Some(self.init_max.map_or(w, |m| m.max(w)));
        } else {
            if w > 0 {
                self.term_pos_sum += w;
            }
            self.term_max = Some(self.term_max.map_or(w, |m| m.max(w)));
        }
    }

    /// Best initiation reward when at least one initiation must be
    /// satisfied; `None` when there is no initiation candidate.
    pub(crate) fn pick_init(&self) -> Option<i64> {
        if self.init_pos_sum > 0 {
            Some(self.init_pos_sum)
        } else {
            self.init_max
        }
    }

    pub(crate) fn pick_term(&self) -> Option<i64> {
        if self.term_pos_sum > 0 {
            Some(self.term_pos_sum)
        } else {
            self.term_max
        }
    }
}

/// Best satisfied-weight score for one fluent's transition, or `None` when
/// no consistent satisfied choice realizes it:
///
/// - off->off: all positive terminations, no initiation;
/// - off->on: at least one initiation, plus positive terminations;
/// - on->off: at least one termination, no initiation;
/// - on->on: either inertia (positive initiations, no termination) or
///   break-and-restart (at least one of each), whichever scores higher.
pub(crate) fn trans_score(cur: bool, next: bool, agg: &Agg) -> Option<i64> {
    if agg.hard_init {
        // head forced on; soft candidates are free extras
        return if next {
            Some(agg.init_pos_sum + agg.term_pos_sum)
        } else {
            None
        };
    }
    if agg.hard_term {
        // inertia blocked; only an initiation keeps the fluent on
        return if next {
            agg.pick_init().map(|i| i + agg.term_pos_sum)
        } else {
            Some(agg.term_pos_sum)
        };
    }
    match (cur, next) {
        (false, false) => Some(agg.term_pos_sum),
        (false, true) => agg.pick_init().map(|i| i + agg.term_pos_sum),
        (true, false) => agg.pick_term(),
        (true, true) => {
            let stay = agg.init_pos_sum;
            let break_and_restart = match (agg.pick_term(), agg.pick_init()) {
                (Some(t), Some(i)) => Some(t + i),
                _ => None,
            };
            Some(match break_and_restart {
                Some(b) if b > stay => b,
                _ => stay,
            })
        }
    }
}

/// The canonical satisfied choice realizing [`trans_score`]: all strictly
/// positive candidates the case admits, plus a single weight-maximal one
/// where the case requires a candidate and none is positive. Ties prefer
/// the earliest candidate in (rule id, substitution) order.
pub(crate) fn extract_choice(
    cur: bool,
    next: bool,
    agg: &Agg,
    step_soft: &[CandRef],
    state: u32,
    fluent: usize,
    out: &mut Vec<usize>,
) {
    let live = |c: &&CandRef| c.fluent == fluent && c.body_true(state);
    let push_positive = |init: bool, out: &mut Vec<usize>| {
        for c in step_soft.iter().filter(live) {
            if c.init == init && c.weight > 0 {
                out.push(c.inst);
            }
        }
    };
    let push_required = |init: bool, out: &mut Vec<usize>| {
        let pos_sum = if init { agg.init_pos_sum } else { agg.term_pos_sum };
        if pos_sum > 0 {
            push_positive(init, out);
        } else {
            let best = step_soft
                .iter()
                .filter(live)
                .filter(|c| c.init == init)
                .reduce(|a, b| if b.weight > a.weight { b } else { a });
            if let Some(c) = best {
                out.push(c.inst);
            }
        }
    };
    if agg.hard_init {
        push_positive(true, out);
        push_positive(false, out);
        return;
    }
    if agg.hard_term {
        if next {
            push_required(true, out);
        }
        push_positive(false, out);
        return;
    }
    match (cur, next) {
        (false, false) => push_positive(false, out),
        (false, true) => {
            push_required(true, out);
            push_positive(false, out);
        }
        (true, false) => push_required(false, out),
        (true, true) => {
            let stay = agg.init_pos_sum;
            let break_and_restart = match (agg.pick_term(), agg.pick_init()) {
                (Some(t), Some(i)) => Some(t + i),
                _ => None,
            };
            if matches!(break_and_restart, Some(b) if b > stay) {
                push_required(false, out);
                push_required(true, out);
            } else {
                push_positive(true, out);
            }
        }
    }
}

struct Group {
    fluents: Vec<Term>,
    soft_insts: Vec<GroundInstance>,
    soft: Vec<CandRef>,
    hard_insts: Vec<GroundInstance>,
    hard: Vec<CandRef>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

fn masks(local: &BTreeMap<&Term, usize>, gi: &GroundInstance) -> (u32, u32) {
    let mut pos_mask = 0u32;
    let mut neg_mask = 0u32;
    for (f, want) in &gi.holds_conditions {
        let bit = 1u32 << local[f];
        if *want {
            pos_mask |= bit;
        } else {
            neg_mask |= bit;
        }
    }
    (pos_mask, neg_mask)
}

fn build_groups(req: &SolveRequest) -> Vec<Group> {
    let soft_insts = req.soft;
    let hard_insts = req.hard;

    let mut fluents: BTreeSet<Term> = req.interp.initial_state().clone();
    if let Some(p) = &req.penalty {
        fluents.extend(p.truth.fluents());
    }
    for g in soft_insts.iter().map(|(g, _)| g).chain(hard_insts.iter()) {
        fluents.insert(g.head_fluent.clone());
        fluents.extend(g.holds_conditions.iter().map(|(f, _)| f.clone()));
    }
    let fluents: Vec<Term> = fluents.into_iter().collect();
    let index: BTreeMap<&Term, usize> = fluents.iter().enumerate().map(|(i, f)| (f, i)).collect();

    let mut parent: Vec<usize> = (0..fluents.len()).collect();
    for g in soft_insts.iter().map(|(g, _)| g).chain(hard_insts.iter()) {
        let h = index[&g.head_fluent];
        for (f, _) in &g.holds_conditions {
            union(&mut parent, h, index[f]);
        }
    }

    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..fluents.len() {
        let r = find(&mut parent, i);
        by_root.entry(r).or_default().push(i);
    }

    let mut groups = Vec::new();
    for members in by_root.into_values() {
        let group_fluents: Vec<Term> = members.iter().map(|&i| fluents[i].clone()).collect();
        assert!(
            group_fluents.len() <= MAX_GROUP,
            "dependency group of {} fluents exceeds the supported joint-state size {MAX_GROUP}",
            group_fluents.len(),
        );
        let local: BTreeMap<&Term, usize> = group_fluents
            .iter()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        let mut g = Group {
            fluents: group_fluents.clone(),
            soft_insts: Vec::new(),
            soft: Vec::new(),
            hard_insts: Vec::new(),
            hard: Vec::new(),
        };
        let mut in_group: Vec<&(GroundInstance, i64)> = soft_insts
            .iter()
            .filter(|(gi, _)| local.contains_key(&gi.head_fluent))
            .collect();
        in_group.sort_by(|a, b| a.0.cmp(&b.0));
        for (gi, w) in in_group {
            let (pos_mask, neg_mask) = masks(&local, gi);
            g.soft.push(CandRef {
                inst: g.soft_insts.len(),
                fluent: local[&gi.head_fluent],
                init: gi.initiates,
                weight: *w,
                pos_mask,
                neg_mask,
            });
            g.soft_insts.push(gi.clone());
        }
        let mut in_group_hard: Vec<&GroundInstance> = hard_insts
            .iter()
            .filter(|gi| local.contains_key(&gi.head_fluent))
            .collect();
        in_group_hard.sort();
        for gi in in_group_hard {
            let (pos_mask, neg_mask) = masks(&local, gi);
            g.hard.push(CandRef {
                inst: g.hard_insts.len(),
                fluent: local[&gi.head_fluent],
                init: gi.initiates,
                weight: 0,
                pos_mask,
                neg_mask,
            });
            g.hard_insts.push(gi.clone());
        }
        groups.push(g);
    }
    groups
}

fn solve_group(group: &Group, req: &SolveRequest) -> Solution {
    let n = group.fluents.len();
    let nstates: usize = 1 << n;
    let t_start = req.interp.t_start();
    let steps = req.interp.window_len();

    let mut s0: u32 = 0;
    for (i, f) in group.fluents.iter().enumerate() {
        if req.interp.initial_state().contains(f) {
            s0 |= 1 << i;
        }
    }

    // candidates indexed per transition step
    let mut step_soft: Vec<Vec<CandRef>> = vec![Vec::new(); steps];
    for c in &group.soft {
        step_soft[(group.soft_insts[c.inst].time - t_start) as usize].push(*c);
    }
    let mut step_hard: Vec<Vec<CandRef>> = vec![Vec::new(); steps];
    for c in &group.hard {
        step_hard[(group.hard_insts[c.inst].time - t_start) as usize].push(*c);
    }

    let compute_aggs = |step: usize, state: u32| -> Vec<Agg> {
        let mut aggs = vec![Agg::default(); n];
        for c in &step_soft[step] {
            if c.body_true(state) {
                aggs[c.fluent].add_soft(c.init, c.weight);
            }
        }
        for c in &step_hard[step] {
            if c.body_true(state) {
                if c.init {
                    aggs[c.fluent].hard_init = true;
                } else {
                    aggs[c.fluent].hard_term = true;
                }
            }
        }
        aggs
    };

    let penalty_at = |fluent: &Term, t: Time, on: bool| -> i64 {
        match &req.penalty {
            Some(p) if p.truth.holds(fluent, t) != on => p.unit,
            _ => 0,
        }
    };

    // value = (combined score, -true count), maximized lexicographically
    let mut val: Vec<Option<(i64, i64)>> = vec![None; nstates];
    val[s0 as usize] = Some((0, -i64::from(s0.count_ones())));
    let mut parents: Vec<Vec<u32>> = Vec::with_capacity(steps);

    for step in 0..steps {
        let t = t_start + step as Time;
        let mut next_val: Vec<Option<(i64, i64)>> = vec![None; nstates];
        let mut par: Vec<u32> = vec![0; nstates];
        for s in 0..nstates as u32 {
            let Some(base) = val[s as usize] else {
                continue;
            };
            let aggs = compute_aggs(step, s);
            let choices: Vec<(Option<i64>, Option<i64>)> = (0..n)
                .map(|fi| {
                    let cur = s >> fi & 1 == 1;
                    (
                        trans_score(cur, false, &aggs[fi]),
                        trans_score(cur, true, &aggs[fi]),
                    )
                })
                .collect();
            'next_state: for snext in 0..nstates as u32 {
                let mut total = 0i64;
                for fi in 0..n {
                    let on = snext >> fi & 1 == 1;
                    match if on { choices[fi].1 } else { choices[fi].0 } {
                        Some(x) => {
                            total += x - penalty_at(&group.fluents[fi], t + 1, on);
                        }
                        None => continue 'next_state,
                    }
                }
                let cand = (base.0 + total, base.1 - i64::from(snext.count_ones()));
                let slot = &mut next_val[snext as usize];
                if slot.map_or(true, |cur| cand > cur) {
                    *slot = Some(cand);
                    par[snext as usize] = s;
                }
            }
        }
        val = next_val;
        parents.push(par);
    }

    // best end state; ties prefer the smallest state
    let (mut best_state, _) = val
        .iter()
        .enumerate()
        .filter_map(|(s, v)| v.map(|v| (s as u32, v)))
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
        .expect("an all-false or pinned-initial trajectory is always feasible");

    let mut path = vec![0u32; steps + 1];
    path[steps] = best_state;
    for step in (0..steps).rev() {
        best_state = parents[step][best_state as usize];
        path[step] = best_state;
    }
    debug_assert_eq!(path[0], s0);

    // extract the satisfied set and tally costs along the optimal path
    let mut chosen: Vec<usize> = Vec::new();
    let mut penalty_cost = 0i64;
    for step in 0..steps {
        let t = t_start + step as Time;
        let s = path[step];
        let snext = path[step + 1];
        let aggs = compute_aggs(step, s);
        for fi in 0..n {
            let cur = s >> fi & 1 == 1;
            let on = snext >> fi & 1 == 1;
            extract_choice(cur, on, &aggs[fi], &step_soft[step], s, fi, &mut chosen);
            penalty_cost += penalty_at(&group.fluents[fi], t + 1, on);
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    let satisfied: Vec<GroundInstance> = chosen
        .iter()
        .map(|&i| group.soft_insts[i].clone())
        .collect();
    let objective: i64 = chosen.iter().map(|&i| group.soft[i].weight).sum();

    let trajectories: Vec<FluentTrajectory> = group
        .fluents
        .iter()
        .enumerate()
        .map(|(fi, f)| FluentTrajectory {
            fluent: f.clone(),
            t_start,
            values: path.iter().map(|s| s >> fi & 1 == 1).collect(),
        })
        .collect();

    Solution {
        trajectories,
        satisfied,
        objective,
        penalty_cost,
    }
}

/// Solves the weighted (plus hard) program over the interpretation,
/// independently per dependency group, and merges deterministically.
pub(crate) fn solve(req: &SolveRequest) -> Solution {
    let mut groups = build_groups(req);
    if let Some(focus) = req.focus {
        groups.retain(|g| g.fluents.iter().any(|f| focus.contains(f)));
    }
    let solutions: Vec<Solution> = if groups.len() > 1 && rayon::current_num_threads() > 1 {
        groups.par_iter().map(|g| solve_group(g, req)).collect()
    } else {
        groups.iter().map(|g| solve_group(g, req)).collect()
    };
    let mut trajectories = Vec::new();
    let mut satisfied = Vec::new();
    let mut objective = 0i64;
    let mut penalty_cost = 0i64;
    for s in solutions {
        trajectories.extend(s.trajectories);
        satisfied.extend(s.satisfied);
        objective += s.objective;
        penalty_cost += s.penalty_cost;
    }
    trajectories.sort_by(|a, b| a.fluent.cmp(&b.fluent));
    satisfied.sort();
    Solution {
        trajectories,
        satisfied,
        objective,
        penalty_cost,
    }
}
