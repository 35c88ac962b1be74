//! Joint optimization selecting which bottom-rule fragments to turn into
//! new rules: minimize (disagreements with the true state under MAP
//! inference of the existing weighted theory plus the candidate rules,
//! priced at the integer equivalent of weight 1.0) plus one unit per
//! selected head or body literal.
//!
//! The search is exact: bottom rules are partitioned into clusters whose
//! candidate groundings touch disjoint fluent dependency groups, clusters
//! are optimized independently by depth-first search over per-rule literal
//! subsets (smaller and lexicographically earlier subsets first, which also
//! fixes the tie-break), and inner MAP evaluations are memoized on the
//! grounding support of the selected rules. A leaf budget truncates the
//! search with a best-so-far result on pathological instances.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::bottom::BottomRule;
use crate::interp::{FluentState, Interpretation};
use crate::kernel::{ground_candidates, validate_rule, GroundInstance, Theory};
use crate::logic::{theta_equivalent, Rule, RuleId, Term};
use crate::map::{ground_theory, scale_weights, Penalty, SolveRequest};
use crate::{Time, Weight};

#[derive(Clone, Debug)]
pub struct InductionConfig {
    /// Maximum selected body literals per rule.
    pub max_body_length: usize,
    /// Weight assigned to freshly induced rules.
    pub initial_weight: Weight,
    /// Scaling constant for the inner MAP inference.
    pub k_scale: u32,
    /// Maximum number of inner MAP evaluations before the search truncates.
    pub max_evaluations: usize,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            max_body_length: 8,
            initial_weight: 0.01,
            k_scale: crate::map::DEFAULT_K,
            max_evaluations: 20_000,
        }
    }
}

/// Per-rule candidate subset cap; combined with the evaluation budget this
/// keeps degenerate bottom rules from exploding the option lists.
const MAX_OPTIONS_PER_RULE: usize = 512;

/// Chosen literal subsets, one slot per bottom rule; `None` leaves the rule
/// unused, `Some(indices)` selects its head plus the indexed body literals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelectionAssignment {
    pub selections: Vec<Option<Vec<usize>>>,
}

impl SelectionAssignment {
    /// Selected use atoms: one per used head, one per selected literal.
    pub fn use_atom_count(&self) -> usize {
        self.selections
            .iter()
            .flatten()
            .map(|idxs| 1 + idxs.len())
            .sum()
    }
}

/// A rule assembled by the optimizer, with its provenance.
#[derive(Clone, Debug)]
pub struct InducedRule {
    pub rule: Rule,
    pub bottom: Arc<BottomRule>,
    pub selected: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct InductionOutcome {
    pub rules: Vec<InducedRule>,
    pub assignment: SelectionAssignment,
    /// Total cost of the chosen assignment (use atoms + priced mistakes −
    /// satisfied weights); comparable across assignments of one call only.
    pub cost: i64,
    /// Cost of selecting nothing, for reference.
    pub empty_cost: i64,
    /// True when a budget or option cap made the result best-so-far only.
    pub truncated: bool,
}

/// Everything the solver consults about one hard rule grounding; the memo
/// key projection.
type Support = (Time, bool, Term, Vec<(Term, bool)>);

fn support_of(instances: &[GroundInstance]) -> Vec<Support> {
    instances
        .iter()
        .map(|g| {
            (
                g.time,
                g.initiates,
                g.head_fluent.clone(),
                g.holds_conditions.clone(),
            )
        })
        .collect()
}

/// One viable literal subset of one bottom rule.
struct SubsetOption {
    indices: Vec<usize>,
    rule: Rule,
    instances: Vec<GroundInstance>,
    support: Vec<Support>,
}

/// Enumerates index subsets of `0..n` in (size, lexicographic) order, up to
/// `cap` subsets of size at most `max_size`.
fn subsets_by_size(n: usize, max_size: usize, cap: usize) -> (Vec<Vec<usize>>, bool) {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut truncated = false;
    'outer: for size in 1..=n.min(max_size) {
        let mut indices: Vec<usize> = (0..size).collect();
        loop {
            if out.len() >= cap {
                truncated = true;
                break 'outer;
            }
            out.push(indices.clone());
            // advance to the next combination
            let mut i = size;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if indices[i] < n - (size - i) {
                    indices[i] += 1;
                    for j in i + 1..size {
                        indices[j] = indices[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    (out, truncated)
}

fn subset_options(
    bottom: &BottomRule,
    interp: &Interpretation,
    cfg: &InductionConfig,
) -> (Vec<SubsetOption>, bool) {
    let n = bottom.body_len();
    let (index_sets, truncated) = subsets_by_size(n, cfg.max_body_length, MAX_OPTIONS_PER_RULE);
    let mut out: Vec<SubsetOption> = Vec::new();
    let mut seen_support: BTreeSet<Vec<Support>> = BTreeSet::new();
    for indices in index_sets {
        let rule = crate::specialize::assemble_from_bottom(
            bottom,
            &indices,
            RuleId(u64::MAX),
            cfg.initial_weight,
        );
        if validate_rule(&rule).is_err() {
            continue;
        }
        let instances = ground_candidates(&rule, interp);
        let support = support_of(&instances);
        // identical support => identical inner behavior; the smaller,
        // earlier subset already covers it
        if !seen_support.insert(support.clone()) {
            continue;
        }
        out.push(SubsetOption {
            indices,
            rule,
            instances,
            support,
        });
    }
    (out, truncated)
}

/// Finds the minimum-cost selection. Ties prefer fewer use atoms and then
/// the earliest assignment in (unused, smaller subsets, lexicographic)
/// order per bottom rule.
pub fn induce_new_rules(
    theory: &Theory,
    bottoms: &[Arc<BottomRule>],
    interp: &Interpretation,
    truth: &FluentState,
    cfg: &InductionConfig,
    next_id: &mut u64,
) -> InductionOutcome {
    let scaled = scale_weights(theory.rules(), cfg.k_scale);
    let unit = scaled.unit_cost();
    let soft = ground_theory(theory.rules(), interp, &scaled);

    let mut any_truncated = false;
    let options: Vec<Vec<SubsetOption>> = bottoms
        .iter()
        .map(|b| {
            let (opts, truncated) = subset_options(b, interp, cfg);
            any_truncated |= truncated;
            opts
        })
        .collect();

    let mut budget = cfg.max_evaluations.max(1);
    let empty_inner = {
        let mut baseline = Evaluator {
            soft: &soft,
            interp,
            truth,
            unit,
            focus: None,
            memo: BTreeMap::new(),
            evaluations: &mut budget,
        };
        baseline
            .inner_value(&[], Vec::new())
            .expect("baseline evaluation fits any budget")
    };
    let empty_cost = -empty_inner;

    // upper bound on any inner value: every positive satisfied weight
    // collected, zero mistakes
    let inner_bound: i64 = soft.iter().map(|(_, w)| (*w).max(0)).sum();

    let (clusters, touched) = cluster_bottoms(&options, &soft, interp, truth);

    let mut selections: Vec<Option<usize>> = vec![None; bottoms.len()];
    let mut total_cost = empty_cost;
    for (cluster, focus) in clusters.iter().zip(&touched) {
        // solving only the groups this cluster's rules can touch keeps the
        // per-leaf cost proportional to the cluster, not the whole window
        let mut evaluator = Evaluator {
            soft: &soft,
            interp,
            truth,
            unit,
            focus: Some(focus),
            memo: BTreeMap::new(),
            evaluations: &mut budget,
        };
        let Some(cluster_empty) = evaluator.inner_value(&[], Vec::new()) else {
            any_truncated = true;
            break;
        };
        let mut search = Search {
            options: &options,
            members: cluster,
            evaluator: &mut evaluator,
            inner_bound,
            best_cost: -cluster_empty,
            best: vec![None; cluster.len()],
            current: Vec::new(),
            truncated: false,
        };
        search.dfs(0, 0);
        any_truncated |= search.truncated;
        total_cost += search.best_cost - (-cluster_empty);
        for (slot, choice) in cluster.iter().zip(&search.best) {
            selections[*slot] = *choice;
        }
    }

    let assignment = SelectionAssignment {
        selections: selections
            .iter()
            .enumerate()
            .map(|(bi, opt)| opt.map(|oi| options[bi][oi].indices.clone()))
            .collect(),
    };
    let mut rules = Vec::new();
    for (bi, opt) in selections.iter().enumerate() {
        if let Some(oi) = opt {
            let template = &options[bi][*oi];
            let mut rule = template.rule.clone();
            rule.id = RuleId(*next_id);
            *next_id += 1;
            rule.bottom = Some(bottoms[bi].clone());
            rules.push(InducedRule {
                rule,
                bottom: bottoms[bi].clone(),
                selected: template.indices.clone(),
            });
        }
    }
    InductionOutcome {
        rules,
        assignment,
        cost: total_cost,
        empty_cost,
        truncated: any_truncated,
    }
}

/// Groups bottom rules whose candidate groundings (over any subset option)
/// touch connected fluents; selections in different clusters affect
/// disjoint dependency groups of the inner MAP, so their costs separate
/// exactly.
fn cluster_bottoms(
    options: &[Vec<SubsetOption>],
    soft: &[(GroundInstance, i64)],
    interp: &Interpretation,
    truth: &FluentState,
) -> (Vec<Vec<usize>>, Vec<BTreeSet<Term>>) {
    let mut fluents: BTreeSet<Term> = interp.initial_state().clone();
    fluents.extend(truth.fluents());
    for (g, _) in soft {
        fluents.insert(g.head_fluent.clone());
        fluents.extend(g.holds_conditions.iter().map(|(f, _)| f.clone()));
    }
    for opts in options {
        for o in opts {
            for g in &o.instances {
                fluents.insert(g.head_fluent.clone());
                fluents.extend(g.holds_conditions.iter().map(|(f, _)| f.clone()));
            }
        }
    }
    let fluents: Vec<Term> = fluents.into_iter().collect();
    let index: BTreeMap<&Term, usize> = fluents.iter().enumerate().map(|(i, f)| (f, i)).collect();

    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    fn unite(p: &mut [usize], a: usize, b: usize) {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            p[hi] = lo;
        }
    }

    let mut parent: Vec<usize> = (0..fluents.len()).collect();
    for (g, _) in soft {
        let h = index[&g.head_fluent];
        for (f, _) in &g.holds_conditions {
            unite(&mut parent, h, index[f]);
        }
    }
    // all fluents one bottom rule can touch are coupled through its
    // selection decision
    let mut touched_per_bottom: Vec<Vec<usize>> = Vec::with_capacity(options.len());
    for opts in options {
        let mut touched: BTreeSet<usize> = BTreeSet::new();
        for o in opts {
            for g in &o.instances {
                touched.insert(index[&g.head_fluent]);
                for (f, _) in &g.holds_conditions {
                    touched.insert(index[f]);
                }
            }
        }
        let touched: Vec<usize> = touched.into_iter().collect();
        for pair in touched.windows(2) {
            unite(&mut parent, pair[0], pair[1]);
        }
        touched_per_bottom.push(touched);
    }

    let mut by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut isolated: Vec<usize> = Vec::new();
    for (bi, touched) in touched_per_bottom.iter().enumerate() {
        match touched.first() {
            Some(&f) => {
                let root = find(&mut parent, f);
                by_root.entry(root).or_default().push(bi);
            }
            None => isolated.push(bi),
        }
    }
    let mut clusters: Vec<Vec<usize>> = by_root.into_values().collect();
    clusters.extend(isolated.into_iter().map(|bi| vec![bi]));
    clusters.sort();
    let touched_sets: Vec<BTreeSet<Term>> = clusters
        .iter()
        .map(|cluster| {
            cluster
                .iter()
                .flat_map(|&bi| touched_per_bottom[bi].iter().map(|&f| fluents[f].clone()))
                .collect()
        })
        .collect();
    (clusters, touched_sets)
}

struct Evaluator<'a, 'b> {
    soft: &'a [(GroundInstance, i64)],
    interp: &'a Interpretation,
    truth: &'a FluentState,
    unit: i64,
    focus: Option<&'a BTreeSet<Term>>,
    memo: BTreeMap<Vec<Support>, i64>,
    /// Remaining evaluation budget, shared across clusters.
    evaluations: &'b mut usize,
}

impl<'a, 'b> Evaluator<'a, 'b> {
    /// `max over trajectories (satisfied scaled weights − unit · mistakes)`
    /// over the focused groups, with the given hard instances added; `None`
    /// once the budget is spent. `key` is the instances' support projection.
    fn inner_value(&mut self, hard: &[GroundInstance], mut key: Vec<Support>) -> Option<i64> {
        key.sort();
        if let Some(v) = self.memo.get(&key) {
            return Some(*v);
        }
        if *self.evaluations == 0 {
            return None;
        }
        *self.evaluations -= 1;
        let solution = crate::map::solve(&SolveRequest {
            soft: self.soft,
            hard,
            penalty: Some(Penalty {
                truth: self.truth,
                unit: self.unit,
            }),
            interp: self.interp,
            focus: self.focus,
        });
        let value = solution.objective - solution.penalty_cost;
        self.memo.insert(key, value);
        Some(value)
    }
}

struct Search<'a, 'b, 'c, 'd> {
    options: &'a [Vec<SubsetOption>],
    /// Bottom-rule indices belonging to this cluster.
    members: &'c [usize],
    evaluator: &'d mut Evaluator<'a, 'b>,
    inner_bound: i64,
    best_cost: i64,
    best: Vec<Option<usize>>,
    current: Vec<Option<usize>>,
    truncated: bool,
}

impl<'a, 'b, 'c, 'd> Search<'a, 'b, 'c, 'd> {
    fn dfs(&mut self, depth: usize, use_atoms: usize) {
        if self.truncated {
            return;
        }
        if depth == self.members.len() {
            let picked: Vec<&SubsetOption> = self
                .current
                .iter()
                .enumerate()
                .filter_map(|(k, o)| o.map(|oi| &self.options[self.members[k]][oi]))
                .collect();
            // skip assignments duplicating a selected clause; dropping the
            // duplicate is never worse
            for (i, a) in picked.iter().enumerate() {
                for b in &picked[i + 1..] {
                    if theta_equivalent(&a.rule, &b.rule) {
                        return;
                    }
                }
            }
            let hard: Vec<GroundInstance> = picked
                .iter()
                .flat_map(|o| o.instances.iter().cloned())
                .collect();
            let key: Vec<Support> = picked
                .iter()
                .flat_map(|o| o.support.iter().cloned())
                .collect();
            let Some(inner) = self.evaluator.inner_value(&hard, key) else {
                self.truncated = true;
                return;
            };
            let cost = use_atoms as i64 - inner;
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.current.clone();
            }
            return;
        }
        // admissible bound: remaining rules can at best drive every mistake
        // to zero at no use-atom cost
        if use_atoms as i64 - self.inner_bound >= self.best_cost {
            return;
        }
        self.current.push(None);
        self.dfs(depth + 1, use_atoms);
        self.current.pop();
        let bi = self.members[depth];
        for oi in 0..self.options[bi].len() {
            let added = 1 + self.options[bi][oi].indices.len();
            self.current.push(Some(oi));
            self.dfs(depth + 1, use_atoms + added);
            self.current.pop();
        }
    }
}
