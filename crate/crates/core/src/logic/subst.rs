//! Variable substitutions.

use std::collections::BTreeMap;

use super::{Atom, Literal, Rule, Term};

/// A mapping from variable names to terms, applied simultaneously.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn bind(&mut self, var: impl Into<String>, term: Term) {
        self.0.insert(var.into(), term);
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Term)> {
        self.0.iter()
    }

    pub fn apply(&self, term: &Term) -> Term {
        match term {
            Term::Const(_) => term.clone(),
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| term.clone()),
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    pub fn apply_atom(&self, atom: &Atom) -> Atom {
        Atom {
            predicate: atom.predicate.clone(),
            args: atom.args.iter().map(|a| self.apply(a)).collect(),
        }
    }

    pub fn apply_literal(&self, lit: &Literal) -> Literal {
        Literal {
            atom: self.apply_atom(&lit.atom),
            negated: lit.negated,
        }
    }

    /// `self` then `other`: `compose(s1, s2).apply(t) == s2.apply(s1.apply(t))`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = BTreeMap::new();
        for (v, t) in &self.0 {
            out.insert(v.clone(), other.apply(t));
        }
        for (v, t) in &other.0 {
            out.entry(v.clone()).or_insert_with(|| t.clone());
        }
        Substitution(out)
    }
}

impl FromIterator<(String, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (String, Term)>>(iter: I) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

/// Applies a substitution to every term of a rule. Predicate symbols,
/// arities and bookkeeping fields are untouched.
pub fn apply_substitution(rule: &Rule, theta: &Substitution) -> Rule {
    let mut out = rule.clone();
    out.head = theta.apply_atom(&rule.head);
    out.body = rule.body.iter().map(|l| theta.apply_literal(l)).collect();
    out
}
