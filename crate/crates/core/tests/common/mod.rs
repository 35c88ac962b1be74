//! Shared fixtures and independent oracles for the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wec_core::interp::{FluentState, Interpretation, TrueState};
use wec_core::kernel::{evaluate_body, ground_candidates, GroundInstance, Theory};
use wec_core::logic::{Atom, Literal, Rule, RuleId, Term, HOLDS, INITIATED, TERMINATED};
use wec_core::map::ScaledWeights;
use wec_core::modes::{ModeArg, ModeDeclaration, PlaceKind, TIME_TYPE};
use wec_core::synthetic::SyntheticSpec;
use wec_core::{Time, Weight};

pub fn happens(ev: &str, t: Time) -> (Time, Atom) {
    (
        t,
        Atom::new(
            "happensAt",
            vec![Term::constant(ev), Term::constant(t.to_string())],
        ),
    )
}

pub fn prop_rule(id: u64, head: &str, fluent: &str, ev: &str, w: Weight) -> Rule {
    Rule::new(
        RuleId(id),
        Atom::new(head, vec![Term::constant(fluent), Term::var("T")]),
        vec![Literal::pos(Atom::new(
            "happensAt",
            vec![Term::constant(ev), Term::var("T")],
        ))],
        w,
    )
}

/// The single-fluent worked program: initiation by `b` (+2) and `d` (−1),
/// termination by `c` (+1).
pub fn example1_theory() -> Theory {
    Theory::new(vec![
        prop_rule(1, INITIATED, "a", "b", 2.0),
        prop_rule(2, TERMINATED, "a", "c", 1.0),
        prop_rule(3, INITIATED, "a", "d", -1.0),
    ])
    .unwrap()
}

pub fn example1_interp() -> Interpretation {
    Interpretation::new(
        1,
        9,
        vec![happens("b", 2), happens("c", 5), happens("d", 8)],
        [],
    )
    .unwrap()
}

/// The two-fluent induction scenario: the worked program's data extended
/// with an early `c` (the over-generalization trap), a second event `e`
/// alongside both `c`s, and a second target fluent that is true from time
/// 6 onwards in the annotation.
pub fn example2_interp() -> Interpretation {
    Interpretation::new(
        1,
        9,
        vec![
            happens("c", 1),
            happens("e", 1),
            happens("b", 2),
            happens("c", 5),
            happens("e", 5),
            happens("d", 8),
        ],
        [],
    )
    .unwrap()
}

pub fn example2_truth() -> TrueState {
    let a = Term::constant("a");
    let aprime = Term::constant("aprime");
    TrueState::new(
        1,
        9,
        (3..=5)
            .map(|t| (a.clone(), t))
            .chain((6..=10).map(|t| (aprime.clone(), t))),
    )
}

pub fn example2_modes() -> Vec<ModeDeclaration> {
    vec![
        ModeDeclaration::head(
            INITIATED,
            vec![
                ModeArg::Place(PlaceKind::Constant, "fluent".into()),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ),
        ModeDeclaration::head(
            TERMINATED,
            vec![
                ModeArg::Place(PlaceKind::Constant, "fluent".into()),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ),
        ModeDeclaration::body(
            "happensAt",
            vec![
                ModeArg::Place(PlaceKind::Constant, "event".into()),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ),
        ModeDeclaration::body(
            HOLDS,
            vec![
                ModeArg::Place(PlaceKind::Constant, "fluent".into()),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ),
    ]
}

/// The rule the induction scenario must produce.
pub fn example2_target_rule() -> Rule {
    Rule::new(
        RuleId(0),
        Atom::new(INITIATED, vec![Term::constant("aprime"), Term::var("T")]),
        vec![
            Literal::pos(Atom::new(
                "happensAt",
                vec![Term::constant("c"), Term::var("T")],
            )),
            Literal::pos(Atom::new(
                HOLDS,
                vec![Term::constant("a"), Term::var("T")],
            )),
        ],
        0.01,
    )
}

/// Random propositional instances within the oracle bounds: up to 2
/// fluents, up to 6 rules, integer weights in [−5, 5], optional holdsAt
/// couplings and negated literals.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (Theory, Interpretation) {
    let fluent_count = rng.gen_range(1..=2usize);
    let fluents = ["f0", "f1"];
    let events = ["e0", "e1", "e2", "e3"];
    let window: Time = if fluent_count == 2 {
        rng.gen_range(2..=7)
    } else {
        rng.gen_range(2..=10)
    };
    let rule_count = rng.gen_range(1..=6usize);
    let mut rules = Vec::new();
    for id in 0..rule_count {
        let fluent = fluents[rng.gen_range(0..fluent_count)];
        let head = if rng.gen_bool(0.5) { INITIATED } else { TERMINATED };
        let weight = rng.gen_range(-5i64..=5) as Weight;
        let mut body = vec![Literal::pos(Atom::new(
            "happensAt",
            vec![
                Term::constant(events[rng.gen_range(0..events.len())]),
                Term::var("T"),
            ],
        ))];
        if rng.gen_bool(0.4) {
            let cond = fluents[rng.gen_range(0..fluent_count)];
            let atom = Atom::new(HOLDS, vec![Term::constant(cond), Term::var("T")]);
            body.push(if rng.gen_bool(0.5) {
                Literal::pos(atom)
            } else {
                Literal::neg(atom)
            });
        }
        rules.push(Rule::new(
            RuleId(id as u64 + 1),
            Atom::new(head, vec![Term::constant(fluent), Term::var("T")]),
            body,
            weight,
        ));
    }
    let theory = Theory::new(rules).unwrap();
    let mut obs = Vec::new();
    for t in 0..window {
        for ev in events {
            if rng.gen_bool(0.35) {
                obs.push(happens(ev, t));
            }
        }
    }
    let initial: Vec<Term> = fluents[..fluent_count]
        .iter()
        .filter(|_| rng.gen_bool(0.3))
        .map(|f| Term::constant(*f))
        .collect();
    let interp = Interpretation::new(0, window - 1, obs, initial).unwrap();
    (theory, interp)
}

/// Ground-truth theory for the synthetic recovery experiments: two target
/// fluent signatures, three rules.
pub fn synthetic_gt_theory() -> Vec<Rule> {
    let rel_rule = |id: u64, head: &str, fluent: &str, ev: &str| {
        Rule::new(
            RuleId(id),
            Atom::new(
                head,
                vec![Term::compound(fluent, vec![Term::var("X")]), Term::var("T")],
            ),
            vec![Literal::pos(Atom::new(
                "happensAt",
                vec![Term::compound(ev, vec![Term::var("X")]), Term::var("T")],
            ))],
            1.0,
        )
    };
    vec![
        rel_rule(1, INITIATED, "active", "begin"),
        rel_rule(2, TERMINATED, "active", "halt"),
        rel_rule(3, INITIATED, "rest", "halt"),
    ]
}

pub fn synthetic_modes() -> Vec<ModeDeclaration> {
    let fluent_template = |name: &str| {
        ModeArg::Compound(
            name.into(),
            vec![ModeArg::Place(PlaceKind::Input, "person".into())],
        )
    };
    let event_template = |name: &str| {
        ModeArg::Compound(
            name.into(),
            vec![ModeArg::Place(PlaceKind::Input, "person".into())],
        )
    };
    let mut modes = Vec::new();
    for fluent in ["active", "rest"] {
        for head in [INITIATED, TERMINATED] {
            modes.push(ModeDeclaration::head(
                head,
                vec![
                    fluent_template(fluent),
                    ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
                ],
            ));
        }
        modes.push(ModeDeclaration::body(
            HOLDS,
            vec![
                fluent_template(fluent),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ));
    }
    for ev in ["begin", "halt", "work"] {
        modes.push(ModeDeclaration::body(
            "happensAt",
            vec![
                event_template(ev),
                ModeArg::Place(PlaceKind::Input, TIME_TYPE.into()),
            ],
        ));
    }
    modes
}

pub fn synthetic_spec(length: Time, noise: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        theory: synthetic_gt_theory(),
        entities: 2,
        length,
        alphabet: vec!["begin".into(), "halt".into(), "work".into()],
        noise,
        seed,
    }
}

/// Fully independent cost oracle for the induction optimization: for one
/// optional hard rule, enumerate every joint trajectory of the tracked
/// fluents and, per transition, every satisfied subset of the body-true
/// weighted candidates, checking consistency against the axioms directly.
/// Returns `use_atoms − max(satisfied − unit·disagreements)`.
pub fn exhaustive_assignment_cost(
    theory: &Theory,
    scaled: &ScaledWeights,
    hard_rule: Option<&Rule>,
    interp: &Interpretation,
    truth: &TrueState,
    unit: i64,
    use_atoms: usize,
    fluents: &[Term],
) -> i64 {
    let soft: Vec<(GroundInstance, i64)> = theory
        .rules()
        .iter()
        .flat_map(|r| {
            let w = scaled.weight(r.id);
            ground_candidates(r, interp).into_iter().map(move |g| (g, w))
        })
        .collect();
    let hard: Vec<GroundInstance> = hard_rule
        .map(|r| ground_candidates(r, interp))
        .unwrap_or_default();
    let steps = interp.window_len();
    let n = fluents.len();
    assert!(n * steps <= 22, "oracle instance too large");
    let t_start = interp.t_start();

    let initial: Vec<bool> = fluents
        .iter()
        .map(|f| interp.initial_state().contains(f))
        .collect();

    let mut best: Option<i64> = None;
    for counter in 0u64..(1u64 << (n * steps)) {
        // decode trajectory: values[f][i] for i in 0..=steps
        let mut values = vec![vec![false; steps + 1]; n];
        for (f, v) in values.iter_mut().enumerate() {
            v[0] = initial[f];
            for step in 0..steps {
                v[step + 1] = counter >> (step * n + f) & 1 == 1;
            }
        }
        let state_at = |t: Time, values: &[Vec<bool>]| -> FluentState {
            let mut s = FluentState::new(interp.t_start(), interp.t_end(), []);
            for (f, v) in values.iter().enumerate() {
                if v[(t - t_start) as usize] {
                    s.insert(fluents[f].clone(), t);
                }
            }
            s
        };
        let mut total = 0i64;
        let mut feasible = true;
        for step in 0..steps {
            let t = t_start + step as Time;
            let state = state_at(t, &values);
            let live_soft: Vec<(usize, &GroundInstance, i64)> = soft
                .iter()
                .enumerate()
                .filter(|(_, (g, _))| g.time == t && evaluate_body(g, interp, &state))
                .map(|(i, (g, w))| (i, g, *w))
                .collect();
            let hard_init: Vec<&Term> = hard
                .iter()
                .filter(|g| g.time == t && g.initiates && evaluate_body(g, interp, &state))
                .map(|g| &g.head_fluent)
                .collect();
            let hard_term: Vec<&Term> = hard
                .iter()
                .filter(|g| g.time == t && !g.initiates && evaluate_body(g, interp, &state))
                .map(|g| &g.head_fluent)
                .collect();
            // best satisfied subset consistent with the transition
            let mut best_subset: Option<i64> = None;
            for mask in 0u64..(1u64 << live_soft.len()) {
                let mut ok = true;
                for (f, fluent) in fluents.iter().enumerate() {
                    let cur = values[f][step];
                    let want = values[f][step + 1];
                    let init = hard_init.contains(&fluent)
                        || live_soft.iter().enumerate().any(|(k, (_, g, _))| {
                            mask >> k & 1 == 1 && g.initiates && g.head_fluent == *fluent
                        });
                    let term = hard_term.contains(&fluent)
                        || live_soft.iter().enumerate().any(|(k, (_, g, _))| {
                            mask >> k & 1 == 1 && !g.initiates && g.head_fluent == *fluent
                        });
                    let derived = init || (cur && !term);
                    if derived != want {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    let score: i64 = live_soft
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, (_, _, w))| w)
                        .sum();
                    best_subset = Some(best_subset.map_or(score, |b: i64| b.max(score)));
                }
            }
            match best_subset {
                Some(s) => total += s,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        // disagreement penalty over the scored range
        for step in 0..steps {
            let t = t_start + step as Time + 1;
            for (f, fluent) in fluents.iter().enumerate() {
                if values[f][step + 1] != truth.holds(fluent, t) {
                    total -= unit;
                }
            }
        }
        best = Some(best.map_or(total, |b| b.max(total)));
    }
    use_atoms as i64 - best.expect("some trajectory is feasible")
}
