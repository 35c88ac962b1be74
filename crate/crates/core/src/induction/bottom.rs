//! Bottom rules: maximally specific clauses grounding the search space for
//! new-rule induction.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::interp::{FluentState, Interpretation};
use crate::logic::{
    theta_equivalent, variabilize, Atom, Literal, Rule, RuleId, Term, VariabilizeError, HOLDS,
};
use crate::modes::{ModeArg, ModeDeclaration, PlaceKind, TIME_TYPE};
use crate::Time;

#[derive(Debug, Error, PartialEq)]
pub enum BottomRuleError {
    #[error("seed {0:?} matches no head mode declaration")]
    NoHeadMode(Atom),
    #[error("seed time argument is not a ground integer")]
    BadSeedTime,
    #[error(transparent)]
    Variabilize(#[from] VariabilizeError),
}

/// A bottom rule: its ground form (head seed plus every mode-conformant
/// literal true at the seed's time) and the variabilized lifted form whose
/// body literals are addressed by index during selection and specialization.
#[derive(Clone, Debug)]
pub struct BottomRule {
    pub ground: Rule,
    pub lifted: Rule,
}

impl BottomRule {
    pub fn body_len(&self) -> usize {
        self.lifted.body.len()
    }
}

fn instantiate(marg: &ModeArg, choices: &mut impl Iterator<Item = String>) -> Term {
    match marg {
        ModeArg::Place(_, _) => Term::Const(choices.next().expect("choice per placemarker")),
        ModeArg::Const(c) => Term::Const(c.clone()),
        ModeArg::Compound(f, args) => Term::Compound(
            f.clone(),
            args.iter().map(|a| instantiate(a, choices)).collect(),
        ),
    }
}

fn placemarkers(args: &[ModeArg], out: &mut Vec<(PlaceKind, String)>) {
    for a in args {
        match a {
            ModeArg::Place(k, ty) => out.push((*k, ty.clone())),
            ModeArg::Compound(_, inner) => placemarkers(inner, out),
            ModeArg::Const(_) => {}
        }
    }
}

/// All ground atoms obtainable from a template by filling placemarkers from
/// the given per-position constant sets (time positions take the seed time).
fn enumerate_template(
    mode: &ModeDeclaration,
    options_per_place: &[Vec<String>],
) -> Vec<Atom> {
    let mut out = Vec::new();
    let mut current: Vec<String> = Vec::new();
    fn rec(
        mode: &ModeDeclaration,
        options: &[Vec<String>],
        pos: usize,
        current: &mut Vec<String>,
        out: &mut Vec<Atom>,
    ) {
        if pos == options.len() {
            let mut it = current.iter().cloned();
            let args = mode
                .args
                .iter()
                .map(|a| instantiate(a, &mut it))
                .collect();
            out.push(Atom::new(mode.predicate.clone(), args));
            return;
        }
        for c in &options[pos] {
            current.push(c.clone());
            rec(mode, options, pos + 1, current, out);
            current.pop();
        }
    }
    rec(mode, options_per_place, 0, &mut current, &mut out);
    out
}

/// Is the ground atom true at `t` under observations plus the inferred
/// fluent trajectories?
fn atom_true(atom: &Atom, t: Time, interp: &Interpretation, state: &FluentState) -> bool {
    if atom.predicate == HOLDS {
        match atom.args.first() {
            Some(f) => state.holds(f, t),
            None => false,
        }
    } else {
        interp.has_fact(t, atom)
    }
}

/// Builds the bottom rule for one abduced head seed: the ground body holds
/// every mode-conformant literal, grounded with constants reachable from
/// the head (inputs chained through outputs), that is true in the
/// interpretation joined with the inferred trajectories at the seed's time.
pub fn generate_bottom_rule(
    seed: &Atom,
    interp: &Interpretation,
    inferred: &FluentState,
    modes: &[ModeDeclaration],
) -> Result<BottomRule, BottomRuleError> {
    let head_mode = modes
        .iter()
        .filter(|m| m.is_head())
        .find(|m| m.match_ground(seed).is_some())
        .ok_or_else(|| BottomRuleError::NoHeadMode(seed.clone()))?;
    let head_bindings = head_mode.match_ground(seed).expect("matched above");
    let time: Time = head_bindings
        .iter()
        .find(|b| b.type_name == TIME_TYPE)
        .and_then(|b| b.constant.parse().ok())
        .ok_or(BottomRuleError::BadSeedTime)?;

    // constants reachable from the head, per placemarker type
    let mut pool: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for b in &head_bindings {
        if b.type_name != TIME_TYPE {
            pool.entry(b.type_name.clone())
                .or_default()
                .insert(b.constant.clone());
        }
    }

    // typed constant index over the whole window, for # and output positions
    // of negated literals (absent atoms bind no constants of their own)
    let mut type_index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for mode in modes.iter().filter(|m| !m.is_head()) {
        if mode.predicate == HOLDS {
            for f in inferred
                .fluents()
                .into_iter()
                .chain(interp.initial_state().iter().cloned())
            {
                let probe = Atom::new(HOLDS, vec![f, Term::constant(time.to_string())]);
                if let Some(bindings) = mode.match_ground(&probe) {
                    for b in bindings {
                        if b.type_name != TIME_TYPE {
                            type_index
                                .entry(b.type_name)
                                .or_default()
                                .insert(b.constant);
                        }
                    }
                }
            }
        } else {
            for (_, fact) in interp.all_observations() {
                if let Some(bindings) = mode.match_ground(fact) {
                    for b in bindings {
                        if b.type_name != TIME_TYPE {
                            type_index
                                .entry(b.type_name)
                                .or_default()
                                .insert(b.constant);
                        }
                    }
                }
            }
        }
    }

    // saturate: literals true at the seed time whose inputs are reachable;
    // outputs extend the pool until fixpoint
    let mut chosen: BTreeSet<(usize, Literal)> = BTreeSet::new();
    loop {
        let mut grew = false;
        for (mode_idx, mode) in modes.iter().enumerate().filter(|(_, m)| !m.is_head()) {
            let mut places = Vec::new();
            placemarkers(&mode.args, &mut places);
            let options: Vec<Vec<String>> = places
                .iter()
                .map(|(kind, ty)| {
                    if ty == TIME_TYPE {
                        vec![time.to_string()]
                    } else {
                        match kind {
                            PlaceKind::Input => {
                                pool.get(ty).map(|s| s.iter().cloned().collect()).unwrap_or_default()
                            }
                            PlaceKind::Output | PlaceKind::Constant => {
                                if mode.negated {
                                    type_index
                                        .get(ty)
                                        .map(|s| s.iter().cloned().collect())
                                        .unwrap_or_default()
                                } else {
                                    // positive outputs/constants come from the
                                    // data itself; enumerate over the index too
                                    type_index
                                        .get(ty)
                                        .map(|s| s.iter().cloned().collect())
                                        .unwrap_or_default()
                                }
                            }
                        }
                    }
                })
                .collect();
            if options.iter().any(|o| o.is_empty()) {
                continue;
            }
            for atom in enumerate_template(mode, &options) {
                let truth = atom_true(&atom, time, interp, inferred);
                let lit_true = if mode.negated { !truth } else { truth };
                if !lit_true {
                    continue;
                }
                let lit = Literal {
                    atom: atom.clone(),
                    negated: mode.negated,
                };
                if chosen.insert((mode_idx, lit)) {
                    grew = true;
                    if !mode.negated {
                        if let Some(bindings) = mode.match_ground(&atom) {
                            for b in bindings {
                                if b.kind == PlaceKind::Output && b.type_name != TIME_TYPE {
                                    pool.entry(b.type_name).or_default().insert(b.constant);
                                }
                            }
                        }
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }

    let body: Vec<Literal> = chosen.into_iter().map(|(_, l)| l).collect();
    let ground = Rule::new(RuleId(0), seed.clone(), body, 0.0);
    let lifted = variabilize(&ground, modes)?;
    Ok(BottomRule { ground, lifted })
}

/// Keeps one representative per θ-subsumption-equivalence class of lifted
/// forms, first seen wins.
pub fn compress_bottom_rules(brs: Vec<BottomRule>) -> Vec<BottomRule> {
    let mut kept: Vec<BottomRule> = Vec::new();
    for br in brs {
        if !kept.iter().any(|k| theta_equivalent(&k.lifted, &br.lifted)) {
            kept.push(br);
        }
    }
    kept
}
