//! Data interpretations: one mini-batch of observations over a time window
//! plus the fluent state at the window start, and the holdsAt state sets
//! that inference and annotation produce over that window.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::logic::{Atom, Term};
use crate::Time;

#[derive(Debug, Error, PartialEq)]
pub enum InterpError {
    #[error("window start {0} exceeds window end {1}")]
    BadWindow(Time, Time),
    #[error("observation at time {0} outside window [{1}, {2}]")]
    OutOfWindow(Time, Time, Time),
    #[error("fact is not ground: {0:?}")]
    NonGround(Atom),
    #[error("initial state fluent is not ground: {0:?}")]
    NonGroundFluent(Term),
}

/// One mini-batch: observations indexed by time over `[t_start, t_end]`,
/// plus the set of target fluent instances holding at `t_start`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Interpretation {
    t_start: Time,
    t_end: Time,
    observations: BTreeMap<Time, BTreeSet<Atom>>,
    initial_state: BTreeSet<Term>,
}

impl Interpretation {
    pub fn new(
        t_start: Time,
        t_end: Time,
        observations: impl IntoIterator<Item = (Time, Atom)>,
        initial_state: impl IntoIterator<Item = Term>,
    ) -> Result<Self, InterpError> {
        if t_start > t_end {
            return Err(InterpError::BadWindow(t_start, t_end));
        }
        let mut obs: BTreeMap<Time, BTreeSet<Atom>> = BTreeMap::new();
        for (t, fact) in observations {
            if t < t_start || t > t_end {
                return Err(InterpError::OutOfWindow(t, t_start, t_end));
            }
            if !fact.is_ground() {
                return Err(InterpError::NonGround(fact));
            }
            obs.entry(t).or_default().insert(fact);
        }
        let mut init = BTreeSet::new();
        for f in initial_state {
            if !f.is_ground() {
                return Err(InterpError::NonGroundFluent(f));
            }
            init.insert(f);
        }
        Ok(Interpretation {
            t_start,
            t_end,
            observations: obs,
            initial_state: init,
        })
    }

    pub fn t_start(&self) -> Time {
        self.t_start
    }

    pub fn t_end(&self) -> Time {
        self.t_end
    }

    /// Number of time points in the window.
    pub fn window_len(&self) -> usize {
        (self.t_end - self.t_start + 1) as usize
    }

    pub fn observations_at(&self, t: Time) -> Option<&BTreeSet<Atom>> {
        self.observations.get(&t)
    }

    pub fn has_fact(&self, t: Time, fact: &Atom) -> bool {
        self.observations
            .get(&t)
            .is_some_and(|s| s.contains(fact))
    }

    pub fn all_observations(&self) -> impl Iterator<Item = (Time, &Atom)> {
        self.observations
            .iter()
            .flat_map(|(t, s)| s.iter().map(move |a| (*t, a)))
    }

    pub fn initial_state(&self) -> &BTreeSet<Term> {
        &self.initial_state
    }

    /// Same window and observations with a different initial state; used by
    /// the learner to carry fluent state across batch boundaries.
    pub fn with_initial_state(&self, initial: impl IntoIterator<Item = Term>) -> Interpretation {
        Interpretation {
            t_start: self.t_start,
            t_end: self.t_end,
            observations: self.observations.clone(),
            initial_state: initial.into_iter().collect(),
        }
    }
}

/// Truth assignment to target fluent instances over a window, covering
/// `[t_start, t_end + 1]`. The value at `t_start` is the (carried or
/// annotated) initial state; the scored range is `(t_start, t_end + 1]`,
/// the time points the window's transitions determine.
///
/// Used both for annotations (true state) and MAP/crisp predictions
/// (inferred state); absent atoms are false (closed world).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FluentState {
    t_start: Time,
    t_end: Time,
    holds: BTreeSet<(Term, Time)>,
}

/// Annotated truth over a window.
pub type TrueState = FluentState;
/// Predicted truth over a window.
pub type InferredState = FluentState;

impl FluentState {
    pub fn new(
        t_start: Time,
        t_end: Time,
        holds: impl IntoIterator<Item = (Term, Time)>,
    ) -> Self {
        let holds = holds
            .into_iter()
            .filter(|(_, t)| *t >= t_start && *t <= t_end + 1)
            .collect();
        FluentState {
            t_start,
            t_end,
            holds,
        }
    }

    pub fn t_start(&self) -> Time {
        self.t_start
    }

    pub fn t_end(&self) -> Time {
        self.t_end
    }

    pub fn holds(&self, fluent: &Term, t: Time) -> bool {
        self.holds.contains(&(fluent.clone(), t))
    }

    pub fn insert(&mut self, fluent: Term, t: Time) {
        if t >= self.t_start && t <= self.t_end + 1 {
            self.holds.insert((fluent, t));
        }
    }

    /// All true atoms, including the initial time point.
    pub fn all_atoms(&self) -> impl Iterator<Item = &(Term, Time)> {
        self.holds.iter()
    }

    /// True atoms in the scored range `(t_start, t_end + 1]`.
    pub fn scored_atoms(&self) -> impl Iterator<Item = &(Term, Time)> {
        self.holds.iter().filter(|(_, t)| *t > self.t_start)
    }

    pub fn scored_set(&self) -> BTreeSet<(Term, Time)> {
        self.scored_atoms().cloned().collect()
    }

    /// Fluents true at the given time.
    pub fn fluents_at(&self, t: Time) -> BTreeSet<Term> {
        self.holds
            .iter()
            .filter(|(_, u)| *u == t)
            .map(|(f, _)| f.clone())
            .collect()
    }

    /// Every fluent instance mentioned.
    pub fn fluents(&self) -> BTreeSet<Term> {
        self.holds.iter().map(|(f, _)| f.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_validation() {
        assert!(Interpretation::new(5, 4, [], []).is_err());
        let a = Atom::new("happensAt", vec![Term::constant("b"), Term::constant("9")]);
        assert!(matches!(
            Interpretation::new(1, 5, [(9, a)], []),
            Err(InterpError::OutOfWindow(9, 1, 5))
        ));
    }

    #[test]
    fn scored_range_excludes_initial_point() {
        let f = Term::constant("a");
        let mut s = FluentState::new(1, 3, [(f.clone(), 1), (f.clone(), 3)]);
        s.insert(f.clone(), 4);
        s.insert(f.clone(), 99); // outside, dropped
        assert!(s.holds(&f, 1));
        let scored: Vec<Time> = s.scored_atoms().map(|(_, t)| *t).collect();
        assert_eq!(scored, vec![3, 4]);
    }
}
