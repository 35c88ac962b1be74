//! Serializers for the surface syntax; inverse of the parser.

use std::fmt::Write as _;

use crate::logic::{Atom, Literal, Rule, Term};
use crate::modes::{ModeArg, ModeDeclaration, ModeKind, PlaceKind};

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(v) => v.clone(),
        Term::Compound(f, args) => {
            let inner: Vec<String> = args.iter().map(print_term).collect();
            format!("{f}({})", inner.join(","))
        }
    }
}

pub fn print_atom(a: &Atom) -> String {
    let inner: Vec<String> = a.args.iter().map(print_term).collect();
    format!("{}({})", a.predicate, inner.join(","))
}

pub fn print_literal(l: &Literal) -> String {
    if l.negated {
        format!("not {}", print_atom(&l.atom))
    } else {
        print_atom(&l.atom)
    }
}

/// `weight head :- body.` with the weight in shortest round-trip form.
pub fn print_rule(r: &Rule) -> String {
    let mut out = String::new();
    let _ = write!(out, "{} {}", r.weight, print_atom(&r.head));
    if !r.body.is_empty() {
        let body: Vec<String> = r.body.iter().map(print_literal).collect();
        let _ = write!(out, " :- {}", body.join(", "));
    }
    out.push('.');
    out
}

pub fn print_rules(rules: &[Rule]) -> String {
    let mut out = String::new();
    for r in rules {
        out.push_str(&print_rule(r));
        out.push('\n');
    }
    out
}

fn print_mode_arg(a: &ModeArg) -> String {
    match a {
        ModeArg::Place(PlaceKind::Input, ty) => format!("+{ty}"),
        ModeArg::Place(PlaceKind::Output, ty) => format!("-{ty}"),
        ModeArg::Place(PlaceKind::Constant, ty) => format!("#{ty}"),
        ModeArg::Const(c) => c.clone(),
        ModeArg::Compound(f, args) => {
            let inner: Vec<String> = args.iter().map(print_mode_arg).collect();
            format!("{f}({})", inner.join(","))
        }
    }
}

pub fn print_mode(m: &ModeDeclaration) -> String {
    let kw = match m.kind {
        ModeKind::Head => "modeh",
        ModeKind::Body => "modeb",
    };
    let neg = if m.negated { "not " } else { "" };
    let inner: Vec<String> = m.args.iter().map(print_mode_arg).collect();
    format!("{kw}({neg}{}({})).", m.predicate, inner.join(","))
}

/// `fact.` line for stream and prediction files.
pub fn print_fact(a: &Atom) -> String {
    format!("{}.", print_atom(a))
}
