//! Crisp Event Calculus semantics: validating theories against the
//! restricted rule language, grounding rule bodies against observations,
//! and forward inference under the inertia axioms.
//!
//! The restricted language: heads are `initiatedAt(F, T)` or
//! `terminatedAt(F, T)` with `T` a variable; body literals are observation
//! atoms or `holdsAt` atoms over target fluents, all at the same time
//! variable `T`; every non-time variable is bound by a positive
//! observation literal. This keeps the program stratified per time step
//! (a fluent's value at `t + 1` depends only on values at `t`), which is
//! what makes exact trajectory optimization possible.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::interp::{FluentState, InferredState, Interpretation};
use crate::logic::{Atom, Literal, Rule, RuleId, Substitution, Term, HOLDS, INITIATED, TERMINATED};
use crate::Time;

#[derive(Debug, Error, PartialEq)]
pub enum TheoryError {
    #[error("rule {0:?}: head predicate must be initiatedAt or terminatedAt, got {1}")]
    BadHeadPredicate(RuleId, String),
    #[error("rule {0:?}: head must be pred(fluent, T) with T a time variable")]
    BadHeadShape(RuleId),
    #[error("rule {0:?}: weight is not finite")]
    NonFiniteWeight(RuleId),
    #[error("rule {0:?}: body literal {1:?} must carry the head time variable as its last argument; references to other time points would break per-step stratification")]
    NonlocalTime(RuleId, Atom),
    #[error("rule {0:?}: initiation/termination predicates cannot occur in bodies")]
    HeadPredicateInBody(RuleId),
    #[error("rule {0:?}: variable {1} is not bound by any positive observation literal")]
    UnboundVariable(RuleId, String),
    #[error("duplicate rule id {0:?}")]
    DuplicateId(RuleId),
}

/// A validated set of weighted rules in the restricted language.
#[derive(Clone, Debug, Default)]
pub struct Theory {
    rules: Vec<Rule>,
}

impl Theory {
    pub fn new(rules: Vec<Rule>) -> Result<Self, TheoryError> {
        let mut seen = BTreeSet::new();
        for r in &rules {
            validate_rule(r)?;
            if !seen.insert(r.id) {
                return Err(TheoryError::DuplicateId(r.id));
            }
        }
        Ok(Theory { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Total literal count, heads included.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Rule::literal_count).sum()
    }
}

pub fn validate_rule(r: &Rule) -> Result<(), TheoryError> {
    if r.head.predicate != INITIATED && r.head.predicate != TERMINATED {
        return Err(TheoryError::BadHeadPredicate(
            r.id,
            r.head.predicate.clone(),
        ));
    }
    if !r.weight.is_finite() {
        return Err(TheoryError::NonFiniteWeight(r.id));
    }
    if r.head.args.len() != 2 {
        return Err(TheoryError::BadHeadShape(r.id));
    }
    let Some(Term::Var(tvar)) = r.head.args.last() else {
        return Err(TheoryError::BadHeadShape(r.id));
    };
    let mut bound: BTreeSet<String> = BTreeSet::new();
    bound.insert(tvar.clone());
    for lit in &r.body {
        let a = &lit.atom;
        if a.predicate == INITIATED || a.predicate == TERMINATED {
            return Err(TheoryError::HeadPredicateInBody(r.id));
        }
        match a.args.last() {
            Some(Term::Var(v)) if v == tvar => {}
            _ => return Err(TheoryError::NonlocalTime(r.id, a.clone())),
        }
        if !lit.negated && a.predicate != HOLDS {
            a.collect_vars(&mut bound);
        }
    }
    // every variable anywhere must be bound by a positive observation
    // literal or be the time variable
    let mut all_vars = BTreeSet::new();
    r.head.collect_vars(&mut all_vars);
    for lit in &r.body {
        lit.atom.collect_vars(&mut all_vars);
    }
    for v in all_vars {
        if !bound.contains(&v) {
            return Err(TheoryError::UnboundVariable(r.id, v));
        }
    }
    Ok(())
}

/// Boolean trajectory of one ground fluent instance over a window:
/// `values[i]` is the truth value at time `t_start + i`, for
/// `i in 0..=window_len` (one more entry than the window has time points,
/// since the last transition determines `t_end + 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FluentTrajectory {
    pub fluent: Term,
    pub t_start: Time,
    pub values: Vec<bool>,
}

impl FluentTrajectory {
    pub fn value_at(&self, t: Time) -> bool {
        let idx = t - self.t_start;
        idx >= 0 && (idx as usize) < self.values.len() && self.values[idx as usize]
    }
}

/// Collects trajectories into a [`FluentState`] over the same window.
pub fn trajectories_to_state(
    trajectories: &[FluentTrajectory],
    t_start: Time,
    t_end: Time,
) -> FluentState {
    let mut state = FluentState::new(t_start, t_end, []);
    for tr in trajectories {
        for (i, v) in tr.values.iter().enumerate() {
            if *v {
                state.insert(tr.fluent.clone(), tr.t_start + i as Time);
            }
        }
    }
    state
}

/// A grounding of a rule at a time point: the substitution, the ground head
/// fluent, and the ground body split into the observation part (already
/// satisfied by construction) and holdsAt conditions evaluated against
/// trajectories.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundInstance {
    pub time: Time,
    pub rule_id: RuleId,
    pub substitution: Substitution,
    /// Ground head fluent instance.
    pub head_fluent: Term,
    /// True for initiation rules, false for termination rules.
    pub initiates: bool,
    /// Full ground body.
    pub body: Vec<Literal>,
    /// holdsAt conditions: (fluent, required value).
    pub holds_conditions: Vec<(Term, bool)>,
}

impl GroundInstance {
    /// Body truth given the fluent values at this instance's time point.
    /// The observation part is true by construction; only the holdsAt
    /// conditions are consulted.
    pub fn body_true_under(&self, holds: impl Fn(&Term) -> bool) -> bool {
        self.holds_conditions
            .iter()
            .all(|(f, want)| holds(f) == *want)
    }
}

/// Enumerates all groundings of `rule` whose non-holdsAt body literals are
/// satisfied by the observations at some time point of the window. holdsAt
/// literals are recorded as symbolic conditions. Deterministic order: by
/// time, then substitution.
pub fn ground_candidates(rule: &Rule, interp: &Interpretation) -> Vec<GroundInstance> {
    let mut out = Vec::new();
    let Some(tvar) = rule.time_var() else {
        return out;
    };
    for t in interp.t_start()..=interp.t_end() {
        let mut theta = Substitution::new();
        theta.bind(tvar.to_string(), Term::constant(t.to_string()));
        let mut partials = vec![theta];
        // join positive observation literals against the observations at t
        for lit in rule.body.iter().filter(|l| !l.negated && l.atom.predicate != HOLDS) {
            let mut next = Vec::new();
            let empty = BTreeSet::new();
            let facts = interp.observations_at(t).unwrap_or(&empty);
            for theta in &partials {
                let pattern = theta.apply_atom(&lit.atom);
                for fact in facts.iter().filter(|f| f.predicate == pattern.predicate) {
                    let mut extended = theta.clone();
                    if crate::logic::match_ground_atom(&pattern, fact, &mut extended) {
                        next.push(extended);
                    }
                }
            }
            partials = next;
            if partials.is_empty() {
                break;
            }
        }
        // filter by negated observation literals (absence)
        partials.retain(|theta| {
            rule.body
                .iter()
                .filter(|l| l.negated && l.atom.predicate != HOLDS)
                .all(|lit| {
                    let ground = theta.apply_atom(&lit.atom);
                    debug_assert!(ground.is_ground(), "unsafe negated literal {ground:?}");
                    !interp.has_fact(t, &ground)
                })
        });
        partials.sort();
        partials.dedup();
        for theta in partials {
            let head = theta.apply_atom(&rule.head);
            let head_fluent = head.args[0].clone();
            debug_assert!(head_fluent.is_ground(), "unsafe rule head {head:?}");
            let body: Vec<Literal> = rule.body.iter().map(|l| theta.apply_literal(l)).collect();
            let holds_conditions = body
                .iter()
                .filter(|l| l.atom.predicate == HOLDS)
                .map(|l| (l.atom.args[0].clone(), !l.negated))
                .collect();
            out.push(GroundInstance {
                time: t,
                rule_id: rule.id,
                substitution: theta,
                head_fluent,
                initiates: rule.is_initiation(),
                body,
                holds_conditions,
            });
        }
    }
    out
}

/// Evaluates the full ground body of an instance against the observations
/// and a fluent state: positive literals must be present (observation or
/// trajectory value), negated literals absent or false.
pub fn evaluate_body(g: &GroundInstance, interp: &Interpretation, state: &FluentState) -> bool {
    g.body.iter().all(|lit| {
        let truth = if lit.atom.predicate == HOLDS {
            state.holds(&lit.atom.args[0], g.time)
        } else {
            interp.has_fact(g.time, &lit.atom)
        };
        truth != lit.negated
    })
}

/// Crisp (unweighted) inference: the unique stable model of the inertia
/// axioms plus the theory and observations, restricted to the window.
/// A fluent holds at `t + 1` iff some rule initiated it at `t`, or it held
/// at `t` and no rule terminated it at `t`. The initial state seeds
/// `t_start`.
pub fn crisp_infer(theory: &Theory, interp: &Interpretation) -> InferredState {
    let candidates: Vec<GroundInstance> = theory
        .rules()
        .iter()
        .flat_map(|r| ground_candidates(r, interp))
        .collect();
    let mut state = FluentState::new(interp.t_start(), interp.t_end(), []);
    let mut current: BTreeSet<Term> = interp.initial_state().clone();
    for f in &current {
        state.insert(f.clone(), interp.t_start());
    }
    let mut fluents: BTreeSet<Term> = current.clone();
    for c in &candidates {
        fluents.insert(c.head_fluent.clone());
        for (f, _) in &c.holds_conditions {
            fluents.insert(f.clone());
        }
    }
    for t in interp.t_start()..=interp.t_end() {
        let here = current.clone();
        let holds_now = |f: &Term| here.contains(f);
        let mut next = BTreeSet::new();
        for f in &fluents {
            let initiated = candidates.iter().any(|c| {
                c.time == t && c.initiates && c.head_fluent == *f && c.body_true_under(holds_now)
            });
            let terminated = candidates.iter().any(|c| {
                c.time == t && !c.initiates && c.head_fluent == *f && c.body_true_under(holds_now)
            });
            if initiated || (here.contains(f) && !terminated) {
                next.insert(f.clone());
            }
        }
        for f in &next {
            state.insert(f.clone(), t + 1);
        }
        current = next;
    }
    state
}
