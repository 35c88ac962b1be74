//! Synthetic event streams with ground-truth annotation: events are drawn
//! uniformly per entity and time point, the true state is derived by crisp
//! inference with a reference theory, and labels are flipped independently
//! with a configurable noise rate.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::interp::Interpretation;
use crate::kernel::{crisp_infer, Theory, TheoryError};
use crate::lang::{AnnotationRecord, StreamRecord};
use crate::logic::{Atom, Rule, Substitution, Term};
use crate::Time;

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    /// Ground-truth theory within the restricted rule language.
    pub theory: Vec<Rule>,
    pub entities: usize,
    /// Number of observation time points (`0..length`).
    pub length: Time,
    /// Event functors; each entity emits one uniformly-drawn event per
    /// time point.
    pub alphabet: Vec<String>,
    /// Probability of flipping each label.
    pub noise: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SyntheticError {
    #[error("noise rate {0} outside [0, 1]")]
    BadNoise(f64),
    #[error("stream needs at least one entity, one event and one time point")]
    Empty,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub records: Vec<StreamRecord>,
    /// Noisy labels over times `1..=length`.
    pub annotations: Vec<AnnotationRecord>,
    /// Noise-free labels (the crisp inference output), for evaluation.
    pub clean_annotations: Vec<AnnotationRecord>,
}

pub fn entity_name(k: usize) -> String {
    format!("id{k}")
}

/// All ground target fluent instances: every head fluent template of the
/// theory instantiated with every combination of entity ids.
pub fn target_fluents(theory: &[Rule], entities: usize) -> BTreeSet<Term> {
    let ids: Vec<Term> = (0..entities)
        .map(|k| Term::constant(entity_name(k)))
        .collect();
    let mut out = BTreeSet::new();
    for rule in theory {
        let template = &rule.head.args[0];
        let vars: Vec<String> = {
            let mut s = BTreeSet::new();
            template.collect_vars(&mut s);
            s.into_iter().collect()
        };
        let mut assignment = vec![0usize; vars.len()];
        'assignments: loop {
            let theta: Substitution = vars
                .iter()
                .cloned()
                .zip(assignment.iter().map(|&i| ids[i].clone()))
                .collect();
            out.insert(theta.apply(template));
            let mut i = 0;
            loop {
                if i == vars.len() {
                    break 'assignments;
                }
                assignment[i] += 1;
                if assignment[i] < ids.len() {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }
    out
}

/// Generates the stream and its annotation. Deterministic in the seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData, SyntheticError> {
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(SyntheticError::BadNoise(spec.noise));
    }
    if spec.entities == 0 || spec.alphabet.is_empty() || spec.length <= 0 {
        return Err(SyntheticError::Empty);
    }
    let theory = Theory::new(spec.theory.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut records = Vec::new();
    for t in 0..spec.length {
        for k in 0..spec.entities {
            let functor = &spec.alphabet[rng.gen_range(0..spec.alphabet.len())];
            let fact = Atom::new(
                "happensAt",
                vec![
                    Term::compound(functor.clone(), vec![Term::constant(entity_name(k))]),
                    Term::constant(t.to_string()),
                ],
            );
            records.push(StreamRecord { time: t, fact });
        }
    }

    let interp = Interpretation::new(
        0,
        spec.length - 1,
        records.iter().map(|r| (r.time, r.fact.clone())),
        [],
    )
    .expect("generated records lie in the window");
    let crisp = crisp_infer(&theory, &interp);

    let fluents = target_fluents(&spec.theory, spec.entities);
    let mut annotations = Vec::new();
    let mut clean = Vec::new();
    for t in 1..=spec.length {
        for f in &fluents {
            let value = crisp.holds(f, t);
            if value {
                clean.push(AnnotationRecord {
                    time: t,
                    fluent: f.clone(),
                });
            }
            let flipped = rng.gen_bool(spec.noise);
            if value != flipped {
                annotations.push(AnnotationRecord {
                    time: t,
                    fluent: f.clone(),
                });
            }
        }
    }
    annotations.sort();
    clean.sort();
    Ok(SyntheticData {
        records,
        annotations,
        clean_annotations: clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Literal, RuleId, INITIATED, TERMINATED};

    pub(crate) fn gt_theory() -> Vec<Rule> {
        let rule = |id: u64, head: &str, fluent: &str, ev: &str| {
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
            rule(1, INITIATED, "active", "begin"),
            rule(2, TERMINATED, "active", "halt"),
            rule(3, INITIATED, "rest", "halt"),
        ]
    }

    fn spec(noise: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            theory: gt_theory(),
            entities: 2,
            length: 200,
            alphabet: vec!["begin".into(), "halt".into(), "work".into()],
            noise,
            seed,
        }
    }

    #[test]
    fn noiseless_annotation_equals_crisp() {
        let data = generate_synthetic(&spec(0.0, 5)).unwrap();
        assert_eq!(data.annotations, data.clean_annotations);
        assert!(!data.annotations.is_empty());
    }

    #[test]
    fn seed_reproducibility() {
        let a = generate_synthetic(&spec(0.1, 9)).unwrap();
        let b = generate_synthetic(&spec(0.1, 9)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.annotations, b.annotations);
        let c = generate_synthetic(&spec(0.1, 10)).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn flip_fraction_within_three_sigma() {
        let noise = 0.05;
        let mut spec = spec(noise, 123);
        spec.length = 2500; // 2500 times x 2 entities x 2 fluent signatures = 10000 labels
        let data = generate_synthetic(&spec).unwrap();
        let clean: BTreeSet<(Term, Time)> = data
            .clean_annotations
            .iter()
            .map(|a| (a.fluent.clone(), a.time))
            .collect();
        let noisy: BTreeSet<(Term, Time)> = data
            .annotations
            .iter()
            .map(|a| (a.fluent.clone(), a.time))
            .collect();
        let labels = (spec.length as u64) * 4;
        let flips = clean.symmetric_difference(&noisy).count() as f64;
        let expected = labels as f64 * noise;
        let sigma = (labels as f64 * noise * (1.0 - noise)).sqrt();
        assert!(
            (flips - expected).abs() <= 3.0 * sigma,
            "flips {flips}, expected {expected} +/- {}",
            3.0 * sigma
        );
    }

    #[test]
    fn target_fluent_instantiation() {
        let fluents = target_fluents(&gt_theory(), 2);
        assert_eq!(fluents.len(), 4); // active/rest x id0/id1
        assert!(fluents.contains(&Term::compound("active", vec![Term::constant("id0")])));
        assert!(fluents.contains(&Term::compound("rest", vec![Term::constant("id1")])));
    }
}
