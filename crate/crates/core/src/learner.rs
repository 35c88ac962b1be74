//! The per-batch online learning loop: predict with MAP inference, compare
//! against the revealed true state, induce new rules from the mistakes,
//! update weights, and attempt Hoeffding-gated specializations — in that
//! order, so a new rule's first subgradient reflects the batch that
//! spawned it while predictions always come from a theory untrained on
//! their batch.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::induction::{
    abduce_heads, compress_bottom_rules, diff_states, generate_bottom_rule, induce_new_rules,
    BottomRule, InductionConfig, Mistake,
};
use crate::interp::{InferredState, Interpretation, TrueState};
use crate::kernel::{Theory, TheoryError};
use crate::lang::Batch;
use crate::logic::{theta_equivalent, Rule, Term};
use crate::map::{map_inference, scale_weights};
use crate::metrics::f1_score;
use crate::modes::ModeDeclaration;
use crate::specialize::{try_specialize, update_gain_stats, SpecializationSlot};
use crate::weights::{batch_weight_update, UpdateContext};
use crate::{Time, Weight};

/// What seeds the next batch's initial fluent state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CarryPolicy {
    /// The final inferred state of the previous batch (streaming
    /// deployment).
    #[default]
    Inferred,
    /// The annotated state at the window start (teacher forcing).
    Annotated,
}

#[derive(Clone, Debug)]
pub struct LearnerConfig {
    pub eta: Weight,
    pub lambda: Weight,
    pub adagrad_delta: Weight,
    pub hoeffding_delta: Weight,
    pub k_scale: u32,
    pub max_body_length: usize,
    pub initial_weight: Weight,
    pub carry: CarryPolicy,
    /// Remove rules whose |weight| stays below this for
    /// `prune_patience` consecutive batches; `None` disables pruning.
    pub prune_threshold: Option<Weight>,
    pub prune_patience: usize,
    /// When false, only weights are learned (fixed structure).
    pub structure_learning: bool,
    /// Budget for the induction search, in inner MAP evaluations.
    pub max_evaluations: usize,
    /// Keep per-batch theory snapshots and predictions for replay checks.
    pub record_replay: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            eta: 1.0,
            lambda: 0.01,
            adagrad_delta: 1.0,
            hoeffding_delta: 0.01,
            k_scale: crate::map::DEFAULT_K,
            max_body_length: 8,
            initial_weight: 0.01,
            carry: CarryPolicy::Inferred,
            prune_threshold: None,
            prune_patience: 3,
            structure_learning: true,
            max_evaluations: 20_000,
            record_replay: false,
        }
    }
}

impl LearnerConfig {
    pub fn update_context(&self) -> UpdateContext<Weight> {
        UpdateContext::new(self.eta, self.lambda, self.adagrad_delta)
    }

    fn induction_config(&self) -> InductionConfig {
        InductionConfig {
            max_body_length: self.max_body_length,
            initial_weight: self.initial_weight,
            k_scale: self.k_scale,
            max_evaluations: self.max_evaluations,
        }
    }
}

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("batch window starts at {got}, expected {expected} (windows must be consecutive)")]
    NonConsecutiveWindow { expected: Time, got: Time },
}

/// One theory rule together with its specialization bookkeeping.
#[derive(Clone, Debug)]
struct TopRule {
    rule: Rule,
    slot: SpecializationSlot,
    below_threshold: usize,
}

/// Cumulative prequential counters (test-then-train: every batch is scored
/// before it is learned from).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// Time points scored so far; denominator of the error rate.
    pub time_points: u64,
}

impl Counters {
    /// Mistakes per scored time point (can exceed 1 with several target
    /// fluent instances per point).
    pub fn error_rate(&self) -> f64 {
        if self.time_points == 0 {
            0.0
        } else {
            (self.fp + self.fn_) as f64 / self.time_points as f64
        }
    }

    pub fn f1(&self) -> f64 {
        f1_score(self.tp, self.fp, self.fn_)
    }
}

#[derive(Clone, Debug, Default)]
pub struct LearnerState {
    top: Vec<TopRule>,
    modes: Vec<ModeDeclaration>,
    next_id: u64,
    batch_index: u64,
    carry_state: BTreeSet<Term>,
    pub counters: Counters,
    /// Number of learning events applied; holdout evaluation must leave
    /// this untouched.
    pub updates: u64,
    expected_t_start: Option<Time>,
}

/// What one processed batch produced.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub predictions: InferredState,
    pub mistakes: Vec<Mistake>,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub induced: usize,
    pub specialized: usize,
    pub pruned: usize,
    pub truncated_search: bool,
    pub infer_ms: f64,
    pub learn_ms: f64,
    pub theory_size: usize,
}

/// Per-batch prequential record.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub batch: u64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub cum_err: f64,
    pub cum_f1: f64,
    pub infer_ms: f64,
    pub learn_ms: f64,
    pub theory_size: usize,
}

#[derive(Clone, Debug, Default)]
pub struct PrequentialTrace {
    pub rows: Vec<TraceRow>,
}

/// Snapshot for prequential-purity replay: the theory as it was when the
/// batch's prediction was made, and that prediction.
#[derive(Clone, Debug)]
pub struct ReplayEntry {
    pub theory_before: Vec<Rule>,
    pub predictions: InferredState,
    pub updates_before: u64,
}

impl LearnerState {
    pub fn new(
        initial_rules: Vec<Rule>,
        modes: Vec<ModeDeclaration>,
    ) -> Result<Self, LearnerError> {
        Theory::new(initial_rules.clone())?;
        let next_id = initial_rules.iter().map(|r| r.id.0 + 1).max().unwrap_or(0);
        let mut state = LearnerState {
            top: Vec::new(),
            modes,
            next_id,
            ..LearnerState::default()
        };
        for rule in initial_rules {
            let slot = match rule.bottom.clone() {
                Some(bottom) => {
                    let selected = selected_indices(&rule, &bottom);
                    SpecializationSlot::new(
                        Some(bottom),
                        selected,
                        &rule,
                        rule.weight,
                        &mut state.next_id,
                    )
                }
                None => SpecializationSlot::default(),
            };
            state.top.push(TopRule {
                rule,
                slot,
                below_threshold: 0,
            });
        }
        Ok(state)
    }

    pub fn rules(&self) -> Vec<Rule> {
        self.top.iter().map(|t| t.rule.clone()).collect()
    }

    pub fn theory(&self) -> Theory {
        Theory::new(self.rules()).expect("learner rules stay within the language")
    }

    /// Total literal count (heads included) of the current theory.
    pub fn theory_size(&self) -> usize {
        self.top.iter().map(|t| t.rule.literal_count()).sum()
    }

    pub fn batch_index(&self) -> u64 {
        self.batch_index
    }

    /// The interpretation the learner will actually reason over: from the
    /// second batch on, the `Inferred` carry policy replaces the loaded
    /// initial state with the previous batch's final inferred state.
    pub fn effective_interp(
        &self,
        interp: &Interpretation,
        cfg: &LearnerConfig,
    ) -> Interpretation {
        if self.batch_index > 0 && cfg.carry == CarryPolicy::Inferred {
            interp.with_initial_state(self.carry_state.iter().cloned())
        } else {
            interp.clone()
        }
    }

    /// Prediction only: no counters, no learning, no carry-state change.
    /// Used for holdout evaluation.
    pub fn predict(&self, interp: &Interpretation, cfg: &LearnerConfig) -> InferredState {
        let theory = self.theory();
        let scaled = scale_weights(theory.rules(), cfg.k_scale);
        map_inference(&theory, interp, &scaled).inferred_state(interp)
    }

    /// One prequential step: predict, score, learn, carry over. A batch
    /// without annotation only predicts.
    pub fn process_batch(
        &mut self,
        interp: &Interpretation,
        truth: Option<&TrueState>,
        cfg: &LearnerConfig,
    ) -> Result<BatchOutcome, LearnerError> {
        if let Some(expected) = self.expected_t_start {
            if interp.t_start() != expected {
                return Err(LearnerError::NonConsecutiveWindow {
                    expected,
                    got: interp.t_start(),
                });
            }
        }
        let interp = self.effective_interp(interp, cfg);

        let infer_start = Instant::now();
        let theory = self.theory();
        let scaled = scale_weights(theory.rules(), cfg.k_scale);
        let map_result = map_inference(&theory, &interp, &scaled);
        let predictions = map_result.inferred_state(&interp);
        let infer_ms = infer_start.elapsed().as_secs_f64() * 1e3;

        let learn_start = Instant::now();
        let mut outcome = BatchOutcome {
            predictions: predictions.clone(),
            mistakes: Vec::new(),
            tp: 0,
            fp: 0,
            fn_: 0,
            induced: 0,
            specialized: 0,
            pruned: 0,
            truncated_search: false,
            infer_ms,
            learn_ms: 0.0,
            theory_size: self.theory_size(),
        };

        if let Some(truth) = truth {
            // score before any learning touches the batch
            let predicted = predictions.scored_set();
            let actual = truth.scored_set();
            outcome.tp = predicted.intersection(&actual).count() as u64;
            outcome.fp = predicted.difference(&actual).count() as u64;
            outcome.fn_ = actual.difference(&predicted).count() as u64;
            self.counters.tp += outcome.tp;
            self.counters.fp += outcome.fp;
            self.counters.fn_ += outcome.fn_;
            self.counters.time_points += interp.window_len() as u64;

            outcome.mistakes = diff_states(truth, &predictions);

            let pre_induction = self.top.len();

            // (1) induce new rules from the mistakes
            if cfg.structure_learning && !outcome.mistakes.is_empty() {
                let seeds = abduce_heads(
                    &outcome.mistakes,
                    &predictions,
                    (interp.t_start(), interp.t_end()),
                );
                let mut bottoms = Vec::new();
                for seed in seeds {
                    match generate_bottom_rule(&seed, &interp, &predictions, &self.modes) {
                        Ok(br) => bottoms.push(br),
                        Err(e) => log::debug!("skipping seed: {e}"),
                    }
                }
                let bottoms: Vec<Arc<BottomRule>> = compress_bottom_rules(bottoms)
                    .into_iter()
                    .map(Arc::new)
                    .collect();
                if !bottoms.is_empty() {
                    let induced = induce_new_rules(
                        &theory,
                        &bottoms,
                        &interp,
                        truth,
                        &cfg.induction_config(),
                        &mut self.next_id,
                    );
                    outcome.truncated_search = induced.truncated;
                    for new_rule in induced.rules {
                        if self
                            .top
                            .iter()
                            .any(|t| theta_equivalent(&t.rule, &new_rule.rule))
                        {
                            continue;
                        }
                        let slot = SpecializationSlot::new(
                            Some(new_rule.bottom.clone()),
                            new_rule.selected.clone(),
                            &new_rule.rule,
                            cfg.initial_weight,
                            &mut self.next_id,
                        );
                        self.top.push(TopRule {
                            rule: new_rule.rule,
                            slot,
                            below_threshold: 0,
                        });
                        outcome.induced += 1;
                    }
                }
            }

            // (2) weight updates for every rule, including the ones just
            // induced (their first subgradient reflects this batch)
            let ctx = cfg.update_context();
            let mut rules: Vec<Rule> = self.top.iter().map(|t| t.rule.clone()).collect();
            batch_weight_update(&mut rules, &interp, &predictions, truth, &ctx);
            for (top, rule) in self.top.iter_mut().zip(rules) {
                top.rule = rule;
            }

            // (3) specialization attempts for rules that existed when the
            // prediction was made
            if cfg.structure_learning {
                for top in self.top.iter_mut().take(pre_induction) {
                    update_gain_stats(
                        &mut top.rule,
                        &mut top.slot,
                        &interp,
                        &predictions,
                        truth,
                        &ctx,
                    );
                }
                for i in 0..pre_induction {
                    if let Some(child_idx) =
                        try_specialize(&self.top[i].rule, &self.top[i].slot, cfg.hoeffding_delta)
                    {
                        let child = self.top[i].slot.children[child_idx].rule.clone();
                        let added = self.top[i].slot.children[child_idx].added;
                        let duplicate = self
                            .top
                            .iter()
                            .enumerate()
                            .any(|(j, t)| j != i && theta_equivalent(&t.rule, &child));
                        if duplicate {
                            // the lattice step rediscovered an existing rule;
                            // dropping the parent merges the two lines
                            self.top[i].below_threshold = usize::MAX;
                        } else {
                            let mut selected = self.top[i].slot.selected.clone();
                            selected.push(added);
                            selected.sort_unstable();
                            let slot = SpecializationSlot::new(
                                self.top[i].slot.bottom.clone(),
                                selected,
                                &child,
                                cfg.initial_weight,
                                &mut self.next_id,
                            );
                            self.top[i] = TopRule {
                                rule: child,
                                slot,
                                below_threshold: 0,
                            };
                        }
                        outcome.specialized += 1;
                    }
                }
                self.top.retain(|t| t.below_threshold != usize::MAX);
            }

            // (4) optional pruning of long-dead rules
            if let Some(threshold) = cfg.prune_threshold {
                for top in &mut self.top {
                    if top.rule.weight.abs() < threshold {
                        top.below_threshold += 1;
                    } else {
                        top.below_threshold = 0;
                    }
                }
                let before = self.top.len();
                let patience = cfg.prune_patience;
                self.top.retain(|t| t.below_threshold < patience);
                outcome.pruned = before - self.top.len();
            }

            self.updates += 1;
        }

        self.carry_state = match (cfg.carry, truth) {
            (CarryPolicy::Annotated, Some(truth)) => truth.fluents_at(interp.t_end() + 1),
            _ => predictions.fluents_at(interp.t_end() + 1),
        };
        self.batch_index += 1;
        self.expected_t_start = Some(interp.t_end() + 1);
        outcome.learn_ms = learn_start.elapsed().as_secs_f64() * 1e3;
        outcome.theory_size = self.theory_size();
        Ok(outcome)
    }
}

/// Which bottom-rule literals a rule uses; recovers selection provenance
/// for rules attached to a bottom rule by the caller.
fn selected_indices(rule: &Rule, bottom: &BottomRule) -> Vec<usize> {
    bottom
        .lifted
        .body
        .iter()
        .enumerate()
        .filter(|(_, lit)| rule.body.contains(lit))
        .map(|(i, _)| i)
        .collect()
}

/// Folds the learner over a batch sequence, emitting the prequential trace
/// and optional replay snapshots.
pub fn run_stream(
    state: &mut LearnerState,
    batches: &[Batch],
    cfg: &LearnerConfig,
) -> Result<(PrequentialTrace, Vec<ReplayEntry>), LearnerError> {
    let mut trace = PrequentialTrace::default();
    let mut replay = Vec::new();
    for batch in batches {
        let snapshot = if cfg.record_replay {
            Some((state.rules(), state.updates))
        } else {
            None
        };
        let outcome = state.process_batch(&batch.interp, batch.truth.as_ref(), cfg)?;
        if let Some((theory_before, updates_before)) = snapshot {
            replay.push(ReplayEntry {
                theory_before,
                predictions: outcome.predictions.clone(),
                updates_before,
            });
        }
        trace.rows.push(TraceRow {
            batch: state.batch_index - 1,
            tp: outcome.tp,
            fp: outcome.fp,
            fn_: outcome.fn_,
            cum_err: state.counters.error_rate(),
            cum_f1: state.counters.f1(),
            infer_ms: outcome.infer_ms,
            learn_ms: outcome.learn_ms,
            theory_size: outcome.theory_size,
        });
    }
    Ok((trace, replay))
}
