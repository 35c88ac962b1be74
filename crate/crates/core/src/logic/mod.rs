//! First-order terms, atoms, literals and rules: the hypothesis-language
//! substrate shared by the parser, the inference engines and the learner.

mod subst;
mod subsume;
mod variabilize;

pub use subst::{apply_substitution, Substitution};
pub use subsume::{theta_equivalent, theta_subsumes};
pub use variabilize::{variabilize, VariabilizeError};

pub(crate) use subsume::match_atom as match_ground_atom;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::induction::BottomRule;
use crate::Weight;

/// Head predicate of initiation rules.
pub const INITIATED: &str = "initiatedAt";
/// Head predicate of termination rules.
pub const TERMINATED: &str = "terminatedAt";
/// Predicate asserting that a fluent holds at a time point.
pub const HOLDS: &str = "holdsAt";

/// A first-order term. Variables are tagged explicitly rather than via a
/// capitalization convention; the surface syntax maps capitalized tokens to
/// `Var` at parse time.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
    Compound(String, Vec<Term>),
}

impl Term {
    pub fn constant(s: impl Into<String>) -> Self {
        Term::Const(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        Term::Var(s.into())
    }

    pub fn compound(f: impl Into<String>, args: Vec<Term>) -> Self {
        let args = args;
        debug_assert!(!args.is_empty(), "compound arity must be >= 1");
        Term::Compound(f.into(), args)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Const(_) => {}
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Compound(_, args) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }
}

/// A predicate applied to terms. Arity is fixed per predicate symbol within
/// a run; the parser and loaders enforce this.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for a in &self.args {
            a.collect_vars(out);
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

/// A possibly negated atom (negation as failure). Negation is only
/// meaningful in rule bodies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal {
            atom,
            negated: false,
        }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal {
            atom,
            negated: true,
        }
    }
}

/// Unique rule identifier, assigned by whoever owns the theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleId(pub u64);

/// Cumulative learning statistics attached to each rule.
///
/// `map_true`/`map_false` accumulate true/false groundings observed in the
/// MAP-inferred states (the P/N counts driving specialization), `grad_sq_sum`
/// accumulates squared subgradients for the adaptive AdaGrad step size, and
/// `observations` counts the time points the rule has been exposed to.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RuleStats {
    pub map_true: u64,
    pub map_false: u64,
    pub grad_sq_sum: f64,
    pub observations: u64,
}

/// A weighted initiation or termination clause.
#[derive(Clone, Debug)]
pub struct Rule {
    pub id: RuleId,
    pub head: Atom,
    pub body: Vec<Literal>,
    pub weight: Weight,
    pub stats: RuleStats,
    /// Bottom rule this rule was assembled from, when learned.
    pub bottom: Option<Arc<BottomRule>>,
    /// Rule this one specializes, when produced by the specializer.
    pub parent: Option<RuleId>,
}

impl Rule {
    pub fn new(id: RuleId, head: Atom, body: Vec<Literal>, weight: Weight) -> Self {
        Rule {
            id,
            head,
            body,
            weight,
            stats: RuleStats::default(),
            bottom: None,
            parent: None,
        }
    }

    pub fn is_initiation(&self) -> bool {
        self.head.predicate == INITIATED
    }

    pub fn is_termination(&self) -> bool {
        self.head.predicate == TERMINATED
    }

    pub fn is_ground(&self) -> bool {
        self.head.is_ground() && self.body.iter().all(|l| l.atom.is_ground())
    }

    /// Head and body equality, ignoring id, weight and bookkeeping. This is
    /// syntactic identity; use [`theta_equivalent`] for equality up to
    /// variable renaming.
    pub fn same_clause(&self, other: &Rule) -> bool {
        self.head == other.head && self.body == other.body
    }

    /// Literal count including the head, the "theory size" contribution.
    pub fn literal_count(&self) -> usize {
        1 + self.body.len()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.head.collect_vars(&mut out);
        for l in &self.body {
            l.atom.collect_vars(&mut out);
        }
        out
    }

    /// The time variable of a well-formed rule: the last head argument.
    pub fn time_var(&self) -> Option<&str> {
        match self.head.args.last() {
            Some(Term::Var(v)) => Some(v),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn t_const(s: &str) -> Term {
        Term::constant(s)
    }

    #[test]
    fn ground_checks() {
        let t = Term::compound("walk", vec![t_const("id1")]);
        assert!(t.is_ground());
        let t2 = Term::compound("walk", vec![Term::var("X")]);
        assert!(!t2.is_ground());
        let a = Atom::new("happensAt", vec![t2, Term::var("T")]);
        assert_eq!(
            a.vars().into_iter().collect::<Vec<_>>(),
            vec!["T".to_string(), "X".to_string()]
        );
    }

    #[test]
    fn time_var_is_last_head_arg() {
        let r = Rule::new(
            RuleId(0),
            Atom::new(INITIATED, vec![t_const("a"), Term::var("T")]),
            vec![],
            1.0,
        );
        assert_eq!(r.time_var(), Some("T"));
    }
}
