//! Lifting ground rules to variabilized ones under mode declarations.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Atom, Literal, Rule, Term};
use crate::modes::{ModeArg, ModeDeclaration, PlaceKind, TIME_TYPE};

#[derive(Debug, Error, PartialEq)]
pub enum VariabilizeError {
    #[error("rule is not ground")]
    NotGround,
    #[error("head {0} matches no head mode declaration")]
    NoHeadMode(String),
}

/// Maps constants to variable names, one table per bottom rule. The first
/// constant bound at a time-typed position is named `T`; everything else is
/// numbered `X0, X1, ...` in first-seen order.
#[derive(Default)]
struct VarTable {
    map: BTreeMap<String, String>,
    next: usize,
}

impl VarTable {
    fn var_for(&mut self, constant: &str, type_name: &str) -> String {
        if let Some(v) = self.map.get(constant) {
            return v.clone();
        }
        let name = if type_name == TIME_TYPE && !self.map.values().any(|v| v == "T") {
            "T".to_string()
        } else {
            let n = format!("X{}", self.next);
            self.next += 1;
            n
        };
        self.map.insert(constant.to_string(), name.clone());
        name
    }
}

fn lift_args(margs: &[ModeArg], args: &[Term], table: &mut VarTable) -> Vec<Term> {
    margs
        .iter()
        .zip(args)
        .map(|(m, t)| lift_arg(m, t, table))
        .collect()
}

fn lift_arg(marg: &ModeArg, term: &Term, table: &mut VarTable) -> Term {
    match (marg, term) {
        (ModeArg::Place(PlaceKind::Constant, _), t) => t.clone(),
        (ModeArg::Place(_, ty), Term::Const(c)) => Term::Var(table.var_for(c, ty)),
        (ModeArg::Const(_), t) => t.clone(),
        (ModeArg::Compound(_, margs), Term::Compound(f, targs)) => {
            Term::Compound(f.clone(), lift_args(margs, targs, table))
        }
        // match_ground already guaranteed structural agreement
        _ => term.clone(),
    }
}

/// Replaces constants at input/output placemarker positions by variables
/// (same constant, same variable, per call) and keeps `#` constants.
/// Body literals that match no mode are dropped with a warning.
pub fn variabilize(ground: &Rule, modes: &[ModeDeclaration]) -> Result<Rule, VariabilizeError> {
    if !ground.is_ground() {
        return Err(VariabilizeError::NotGround);
    }
    let mut table = VarTable::default();
    let head_mode = modes
        .iter()
        .filter(|m| m.is_head())
        .find(|m| m.match_ground(&ground.head).is_some())
        .ok_or_else(|| VariabilizeError::NoHeadMode(ground.head.predicate.clone()))?;
    let head = Atom {
        predicate: ground.head.predicate.clone(),
        args: lift_args(&head_mode.args, &ground.head.args, &mut table),
    };
    let mut body = Vec::new();
    for lit in &ground.body {
        let mode = modes
            .iter()
            .filter(|m| !m.is_head() && m.negated == lit.negated)
            .find(|m| m.match_ground(&lit.atom).is_some());
        match mode {
            Some(m) => body.push(Literal {
                atom: Atom {
                    predicate: lit.atom.predicate.clone(),
                    args: lift_args(&m.args, &lit.atom.args, &mut table),
                },
                negated: lit.negated,
            }),
            None => {
                log::warn!("dropping body literal with no matching mode: {:?}", lit);
            }
        }
    }
    let mut out = ground.clone();
    out.head = head;
    out.body = body;
    Ok(out)
}
