use proptest::prelude::*;

use super::parser::{parse_facts, parse_modes, parse_rules};
use super::printer::{print_fact, print_mode, print_rule};
use crate::logic::{Atom, Literal, Rule, RuleId, Term};
use crate::modes::{ModeArg, ModeDeclaration, ModeKind, PlaceKind, TIME_TYPE};

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_]{0,6}"
}

fn var_name() -> impl Strategy<Value = String> {
    "[A-Z][A-Za-z0-9_]{0,4}"
}

fn leaf_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        ident().prop_map(Term::Const),
        var_name().prop_map(Term::Var),
        (0i64..10_000).prop_map(|n| Term::Const(n.to_string())),
        (-10_000i64..0).prop_map(|n| Term::Const(n.to_string())),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf_term().prop_recursive(2, 8, 3, |inner| {
        (ident(), prop::collection::vec(inner, 1..3))
            .prop_map(|(f, args)| Term::Compound(f, args))
    })
}

/// Predicate names encode their arity so every generated program respects
/// the fixed-arity invariant.
fn atom() -> impl Strategy<Value = Atom> {
    (ident(), prop::collection::vec(term(), 1..4)).prop_map(|(p, args)| {
        Atom::new(format!("{p}_{}", args.len()), args)
    })
}

fn rule() -> impl Strategy<Value = Rule> {
    (
        atom(),
        prop::collection::vec((atom(), any::<bool>()), 0..4),
        -100.0f64..100.0,
    )
        .prop_map(|(head, body, weight)| {
            let body = body
                .into_iter()
                .map(|(atom, negated)| Literal { atom, negated })
                .collect();
            Rule::new(RuleId(0), head, body, weight)
        })
}

fn mode_arg() -> impl Strategy<Value = ModeArg> {
    let leaf = prop_oneof![
        (
            prop_oneof![
                Just(PlaceKind::Input),
                Just(PlaceKind::Output),
                Just(PlaceKind::Constant)
            ],
            ident()
        )
            .prop_map(|(k, ty)| ModeArg::Place(k, ty)),
        ident().prop_map(ModeArg::Const),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        (ident(), prop::collection::vec(inner, 1..3))
            .prop_map(|(f, args)| ModeArg::Compound(f, args))
    })
}

fn mode() -> impl Strategy<Value = ModeDeclaration> {
    (
        any::<bool>(),
        ident(),
        prop::collection::vec(mode_arg(), 0..3),
    )
        .prop_map(|(negated, pred, mut args)| {
            // exactly one time placemarker, appended last
            strip_time(&mut args);
            args.push(ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()));
            ModeDeclaration {
                kind: ModeKind::Body,
                negated,
                predicate: pred,
                args,
            }
        })
}

fn strip_time(args: &mut Vec<ModeArg>) {
    args.retain(|a| !mentions_time(a));
}

fn mentions_time(a: &ModeArg) -> bool {
    match a {
        ModeArg::Place(_, ty) => ty == TIME_TYPE,
        ModeArg::Compound(_, args) => args.iter().any(mentions_time),
        ModeArg::Const(_) => false,
    }
}

fn ground_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        ident().prop_map(Term::Const),
        (0i64..1000).prop_map(|n| Term::Const(n.to_string())),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| {
        (ident(), prop::collection::vec(inner, 1..3))
            .prop_map(|(f, args)| Term::Compound(f, args))
    })
}

proptest! {
    #[test]
    fn rule_parse_print_round_trip(r in rule()) {
        let printed = print_rule(&r);
        let parsed = parse_rules(&printed, 0.0).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert!(parsed[0].same_clause(&r), "{} reparsed as {:?}", printed, parsed[0]);
        prop_assert_eq!(parsed[0].weight, r.weight);
    }

    #[test]
    fn mode_parse_print_round_trip(m in mode()) {
        let printed = print_mode(&m);
        let parsed = parse_modes(&printed).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0], &m, "{}", printed);
    }

    #[test]
    fn fact_parse_print_round_trip(args in prop::collection::vec(ground_term(), 0..3), p in ident(), t in 0i64..10_000) {
        let mut full = args;
        full.push(Term::Const(t.to_string()));
        let fact = Atom::new(format!("{p}_{}", full.len()), full);
        let printed = print_fact(&fact);
        let records = parse_facts(&printed).unwrap();
        prop_assert_eq!(records.len(), 1);
        prop_assert_eq!(&records[0].fact, &fact);
        prop_assert_eq!(records[0].time, t);
    }

    #[test]
    fn parsed_rules_are_well_formed(r in rule()) {
        let parsed = parse_rules(&print_rule(&r), 0.0).unwrap();
        prop_assert!(parsed[0].weight.is_finite());
    }
}
