//! θ-subsumption between clauses by backtracking search.
//!
//! `r1` subsumes `r2` iff some substitution θ maps `head(r1)θ = head(r2)`
//! and `body(r1)θ ⊆ body(r2)` (set inclusion; two body literals of `r1` may
//! map onto the same literal of `r2`). Matching is one-way: variables of
//! `r2` are treated as constants.

use super::{Atom, Literal, Rule, Substitution, Term};

fn match_term(pattern: &Term, target: &Term, theta: &mut Substitution) -> bool {
    match (pattern, target) {
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::Var(v), t) => match theta.get(v) {
            Some(bound) => bound == t,
            None => {
                theta.bind(v.clone(), t.clone());
                true
            }
        },
        (Term::Compound(f, fa), Term::Compound(g, ga)) => {
            f == g && fa.len() == ga.len() && {
                fa.iter().zip(ga).all(|(p, t)| match_term(p, t, theta))
            }
        }
        _ => false,
    }
}

pub(crate) fn match_atom(pattern: &Atom, target: &Atom, theta: &mut Substitution) -> bool {
    pattern.predicate == target.predicate
        && pattern.args.len() == target.args.len()
        && pattern
            .args
            .iter()
            .zip(&target.args)
            .all(|(p, t)| match_term(p, t, theta))
}

fn search(lits: &[&Literal], target: &[Literal], theta: &Substitution) -> bool {
    let Some((first, rest)) = lits.split_first() else {
        return true;
    };
    for cand in target {
        if cand.negated != first.negated {
            continue;
        }
        let mut extended = theta.clone();
        if match_atom(&first.atom, &cand.atom, &mut extended) && search(rest, target, &extended) {
            return true;
        }
    }
    false
}

/// True iff `r1` θ-subsumes `r2`.
pub fn theta_subsumes(r1: &Rule, r2: &Rule) -> bool {
    let mut theta = Substitution::new();
    if !match_atom(&r1.head, &r2.head, &mut theta) {
        return false;
    }
    // most constrained first: literals with fewer compatible targets
    let mut ordered: Vec<&Literal> = r1.body.iter().collect();
    ordered.sort_by_key(|l| {
        r2.body
            .iter()
            .filter(|c| c.negated == l.negated && c.atom.predicate == l.atom.predicate)
            .count()
    });
    search(&ordered, &r2.body, &theta)
}

/// Mutual θ-subsumption: equality up to variable renaming and literal
/// duplication.
pub fn theta_equivalent(r1: &Rule, r2: &Rule) -> bool {
    theta_subsumes(r1, r2) && theta_subsumes(r2, r1)
}
