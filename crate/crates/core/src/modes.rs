//! Mode declarations bounding the hypothesis language.
//!
//! A mode template mirrors an atom whose leaf positions carry placemarkers:
//! `+type` marks an input variable, `-type` an output variable and `#type`
//! a constant that is retained verbatim when a ground rule is variabilized.
//! Template positions may also be exact constants (e.g. a propositional
//! fluent name), which must match literally.

use crate::logic::{Atom, Term, HOLDS, INITIATED, TERMINATED};

/// The distinguished placemarker type for time arguments.
pub const TIME_TYPE: &str = "time";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlaceKind {
    /// `+type`: must be filled by an already-known constant.
    Input,
    /// `-type`: introduces a new constant from the data.
    Output,
    /// `#type`: a constant kept as-is under variabilization.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModeArg {
    Place(PlaceKind, String),
    Const(String),
    Compound(String, Vec<ModeArg>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModeKind {
    Head,
    Body,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeDeclaration {
    pub kind: ModeKind,
    /// Body literal is negated (`modeb(not p(...))`).
    pub negated: bool,
    pub predicate: String,
    pub args: Vec<ModeArg>,
}

/// A leaf binding discovered while matching an atom against a template.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceBinding {
    pub kind: PlaceKind,
    pub type_name: String,
    pub constant: String,
}

impl ModeDeclaration {
    pub fn head(predicate: impl Into<String>, args: Vec<ModeArg>) -> Self {
        ModeDeclaration {
            kind: ModeKind::Head,
            negated: false,
            predicate: predicate.into(),
            args,
        }
    }

    pub fn body(predicate: impl Into<String>, args: Vec<ModeArg>) -> Self {
        ModeDeclaration {
            kind: ModeKind::Body,
            negated: false,
            predicate: predicate.into(),
            args,
        }
    }

    pub fn body_negated(predicate: impl Into<String>, args: Vec<ModeArg>) -> Self {
        ModeDeclaration {
            kind: ModeKind::Body,
            negated: true,
            predicate: predicate.into(),
            args,
        }
    }

    pub fn is_head(&self) -> bool {
        self.kind == ModeKind::Head
    }

    /// Exactly one `+time` placemarker; head templates must be over the
    /// initiation/termination predicates.
    pub fn validate(&self) -> Result<(), String> {
        let mut times = 0usize;
        fn walk(arg: &ModeArg, times: &mut usize) {
            match arg {
                ModeArg::Place(_, ty) if ty == TIME_TYPE => *times += 1,
                ModeArg::Compound(_, args) => args.iter().for_each(|a| walk(a, times)),
                _ => {}
            }
        }
        self.args.iter().for_each(|a| walk(a, &mut times));
        if times != 1 {
            return Err(format!(
                "mode for {} must have exactly one time argument, found {}",
                self.predicate, times
            ));
        }
        if self.is_head() && self.predicate != INITIATED && self.predicate != TERMINATED {
            return Err(format!(
                "head mode must use {INITIATED} or {TERMINATED}, got {}",
                self.predicate
            ));
        }
        if self.predicate == HOLDS && self.is_head() {
            return Err("holdsAt cannot be a head mode".into());
        }
        Ok(())
    }

    /// Matches a ground atom against this template, collecting placemarker
    /// bindings in template order. Returns `None` when the structure or an
    /// exact constant does not match.
    pub fn match_ground(&self, atom: &Atom) -> Option<Vec<PlaceBinding>> {
        if atom.predicate != self.predicate || atom.args.len() != self.args.len() {
            return None;
        }
        let mut out = Vec::new();
        for (marg, term) in self.args.iter().zip(&atom.args) {
            if !match_arg(marg, term, &mut out) {
                return None;
            }
        }
        Some(out)
    }
}

fn match_arg(marg: &ModeArg, term: &Term, out: &mut Vec<PlaceBinding>) -> bool {
    match (marg, term) {
        (ModeArg::Place(kind, ty), Term::Const(c)) => {
            out.push(PlaceBinding {
                kind: *kind,
                type_name: ty.clone(),
                constant: c.clone(),
            });
            true
        }
        (ModeArg::Const(expected), Term::Const(c)) => expected == c,
        (ModeArg::Compound(f, margs), Term::Compound(g, targs)) => {
            f == g
                && margs.len() == targs.len()
                && margs.iter().zip(targs).all(|(m, t)| match_arg(m, t, out))
        }
        _ => false,
    }
}
