//! The per-phase driver: policy-learning iterations over rebuilt local
//! environments, the n-step rollout, the decoupled reward fed to Exp3, and
//! the final incremental training step.
//!
//! Each phase with index `i >= 1` runs two parts. Policy learning resamples a
//! class-balanced local validation set every iteration, samples an action,
//! scores it by a short rollout from a copy of the previous model, and
//! updates the Exp3 weights. CIL training then samples one action from the
//! learned policy, grows the classifier head for the phase's new classes,
//! trains on exemplars plus new data for the full epoch budget, and evaluates
//! on the held-out test set — the only moment that set may be read.
//!
//! Randomness discipline: every phase derives three child seeds (policy
//! learning, final action sampling, training) from its phase seed. Fixed-
//! action runs draw the same child seeds and simply leave two unused, which
//! keeps their training streams identical to online runs and makes the two
//! modes bitwise comparable.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bandit::PolicyState;
use crate::datastream::{
    split_local, update_exemplars, AuditedDataset, ExemplarStore, LabeledDataset,
    LocalEnvironment, PhaseSchedule,
};
use crate::error::{Error, Result};
use crate::hyperspace::{Action, ActionSpace, Classifier};
use crate::learner::{train_for_epochs, Arch, ModelState};

/// Budgets and scalars for one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Policy iterations per learning round (T).
    pub policy_iters: usize,
    /// Simulated future phases in each rollout (n).
    pub lookahead: usize,
    /// Full-training epochs per phase (M2).
    pub m2_epochs: usize,
    /// Rollout epochs per sub-step (M1); `ceil(0.1 * M2)` unless overridden.
    pub m1_epochs: usize,
    /// Per-class size of the rebuilt local validation set (b).
    pub local_val_per_class: usize,
    /// Run policy learning only in phases where `i % period == 0`.
    pub policy_update_period: usize,
    pub batch_size: usize,
    /// Distillation temperature; must exceed 1.
    pub tau: f64,
    /// Exp3 step size.
    pub xi: f64,
    /// Uniform-exploration mixing for the policy (0 = pure normalization).
    pub exploration_mix: f64,
    /// Exemplars retained per class.
    pub exemplar_budget: usize,
    /// Learning rate for the fixed CE-only pre-training phase.
    pub phase0_lr: f64,
}

/// `ceil(0.1 * m2)`.
pub fn default_m1(m2_epochs: usize) -> usize {
    m2_epochs.div_ceil(10)
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            policy_iters: 25,
            lookahead: 1,
            m2_epochs: 20,
            m1_epochs: default_m1(20),
            local_val_per_class: 2,
            policy_update_period: 1,
            batch_size: 16,
            tau: 2.0,
            xi: 0.1,
            exploration_mix: 0.0,
            exemplar_budget: 5,
            phase0_lr: 0.05,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.policy_iters == 0 {
            return Err(Error::InvalidParameter("policy_iters must be >= 1".into()));
        }
        if self.m1_epochs == 0 || self.m2_epochs < self.m1_epochs {
            return Err(Error::InvalidParameter(format!(
                "epoch budgets need m2 >= m1 >= 1, got m2={}, m1={}",
                self.m2_epochs, self.m1_epochs
            )));
        }
        if self.local_val_per_class == 0 {
            return Err(Error::InvalidParameter(
                "local_val_per_class must be >= 1".into(),
            ));
        }
        if self.policy_update_period == 0 {
            return Err(Error::InvalidParameter(
                "policy_update_period must be >= 1".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidParameter("batch_size must be >= 1".into()));
        }
        if !self.tau.is_finite() || self.tau <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tau must exceed 1, got {}",
                self.tau
            )));
        }
        if !self.xi.is_finite() || self.xi <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if self.exemplar_budget == 0 {
            return Err(Error::InvalidParameter("exemplar_budget must be >= 1".into()));
        }
        if !self.phase0_lr.is_finite() || self.phase0_lr <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "phase0_lr must be positive, got {}",
                self.phase0_lr
            )));
        }
        Ok(())
    }
}

/// Append-only record of realized per-phase rewards (test accuracies of the
/// phases driven by actions). These form the historical part of the
/// cumulative reward estimate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RewardLedger {
    rewards: Vec<f64>,
}

impl RewardLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, reward: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::RewardOutOfRange { reward });
        }
        self.rewards.push(reward);
        Ok(())
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.rewards.iter().sum()
    }
}

/// One policy-learning iteration, as recorded in run traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub action_index: usize,
    pub action: Action,
    /// p(action) at the moment it was sampled.
    pub probability: f64,
    /// Normalized lookahead reward fed to the Exp3 update.
    pub reward: f64,
    /// Historical rewards plus the un-normalized lookahead sum; the full
    /// cumulative estimate this iteration's reward was derived from.
    pub cumulative_reward: f64,
}

/// Everything observable about one completed phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub phase: usize,
    /// Index into the action space; `None` for the fixed pre-training phase.
    pub action_index: Option<usize>,
    pub action: Action,
    /// Accuracy on the cumulative held-out test set.
    pub accuracy: f64,
    /// Policy snapshot after this phase (online runs only).
    pub policy: Option<PolicyState>,
    pub trace: Vec<IterationRecord>,
    /// Test-set audit counter sampled just before final evaluation; 0 in any
    /// protocol-respecting run.
    pub test_reads_before_eval: u64,
}

/// How the per-phase action is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionMode {
    /// Sample from the Exp3 policy learned across phases.
    Online,
    /// Always apply the action at this index; no policy machinery runs.
    Fixed(usize),
}

/// An action space plus the selection mode driving it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSelection {
    pub space: ActionSpace,
    pub mode: ActionMode,
}

impl ActionSelection {
    pub fn online(space: ActionSpace) -> Result<Self> {
        if space.len() < 2 {
            return Err(Error::InvalidActionSpace {
                num_actions: space.len(),
            });
        }
        Ok(Self {
            space,
            mode: ActionMode::Online,
        })
    }

    pub fn fixed(space: ActionSpace, index: usize) -> Result<Self> {
        space.action_at(index)?;
        Ok(Self {
            space,
            mode: ActionMode::Fixed(index),
        })
    }

    /// Fixed mode over a one-action space holding exactly `action`.
    pub fn fixed_action(action: Action) -> Self {
        Self {
            space: ActionSpace::singleton(action),
            mode: ActionMode::Fixed(0),
        }
    }
}

/// Train-and-evaluate chain for one action on a local environment.
///
/// Starting from a copy of `model` (the previous phase's state, left
/// untouched), the head grows to cover the environment's classes, then
/// `lookahead + 1` sub-steps each train `m1_epochs` on the local training
/// split and evaluate on the local validation split, chaining the model so
/// sub-step `j` distills from the model that entered it. Returns the
/// validation accuracies in order.
pub fn rollout(
    model: &ModelState,
    action: &Action,
    local: &LocalEnvironment,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let new_total = local
        .train
        .max_label()
        .map(|m| m + 1)
        .unwrap_or(0)
        .max(model.num_classes());
    let mut teacher = model.clone();
    let mut current = model.clone();
    current.grow_head(new_total, rng)?;

    let mut rewards = Vec::with_capacity(cfg.lookahead + 1);
    for _ in 0..=cfg.lookahead {
        let next = train_for_epochs(
            current,
            Some(&teacher),
            action,
            cfg.tau,
            &local.train,
            cfg.m1_epochs,
            cfg.batch_size,
            rng,
        )?;
        let means = match action.delta {
            Classifier::Ncm => Some(next.class_means(&local.train)?),
            Classifier::Fc => None,
        };
        rewards.push(next.accuracy_on(&local.val, action.delta, means.as_ref())?);
        teacher = next.clone();
        current = next;
    }
    Ok(rewards)
}

/// The reward handed to Exp3: the mean of the rollout rewards.
///
/// The historical part of the cumulative estimate (the ledger sum) is a
/// constant with respect to the action under evaluation, and Exp3 divides
/// the reward by p(action), so an additive constant would distort the
/// importance weighting rather than cancel out. It is therefore excluded
/// here and reported alongside via [`cumulative_reward_estimate`]. The mean
/// (rather than the sum) keeps the value in `[0, 1]` for any lookahead.
pub fn decoupled_reward(rollout_rewards: &[f64], ledger: &RewardLedger) -> Result<f64> {
    if rollout_rewards.is_empty() {
        return Err(Error::EmptyRollout);
    }
    for &r in rollout_rewards {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::RewardOutOfRange { reward: r });
        }
    }
    let mean = rollout_rewards.iter().sum::<f64>() / rollout_rewards.len() as f64;
    log::trace!(
        "reward {mean:.4} (cumulative estimate {:.4})",
        cumulative_reward_estimate(rollout_rewards, ledger)
    );
    Ok(mean)
}

/// Historical rewards plus the raw lookahead sum; the full cumulative value
/// the normalized bandit reward is derived from.
pub fn cumulative_reward_estimate(rollout_rewards: &[f64], ledger: &RewardLedger) -> f64 {
    ledger.total() + rollout_rewards.iter().sum::<f64>()
}

fn policy_learning_impl<F>(
    mut policy: PolicyState,
    space: &ActionSpace,
    ledger: &RewardLedger,
    iters: usize,
    rng: &mut ChaCha8Rng,
    mut evaluate: F,
) -> Result<(PolicyState, Vec<IterationRecord>)>
where
    F: FnMut(usize, &Action, u64) -> Result<Vec<f64>>,
{
    let mut trace = Vec::with_capacity(iters);
    for t in 0..iters {
        let step = (|| -> Result<IterationRecord> {
            let split_seed = rng.next_u64();
            let distribution = policy.distribution();
            let action_index = policy.sample(rng);
            let probability = distribution[action_index];
            let action = space.action_at(action_index)?;
            let rewards = evaluate(t, &action, split_seed)?;
            let reward = decoupled_reward(&rewards, ledger)?;
            policy.update(action_index, reward)?;
            Ok(IterationRecord {
                iteration: t,
                action_index,
                action,
                probability,
                reward,
                cumulative_reward: cumulative_reward_estimate(&rewards, ledger),
            })
        })()
        .map_err(|e| e.in_iteration(t))?;
        trace.push(step);
    }
    Ok((policy, trace))
}

/// One round of T policy iterations for the given phase training data.
///
/// Every iteration rebuilds a fresh local environment (the class-balanced
/// split is resampled inside the loop), samples an action from the current
/// policy, rolls it out from `model`, and applies the Exp3 update.
pub fn policy_learning_round(
    model: &ModelState,
    train_data: &LabeledDataset,
    policy: PolicyState,
    ledger: &RewardLedger,
    space: &ActionSpace,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(PolicyState, Vec<IterationRecord>)> {
    let mut rollout_seeds = ChaCha8Rng::seed_from_u64(rng.next_u64());
    policy_learning_impl(
        policy,
        space,
        ledger,
        cfg.policy_iters,
        rng,
        |_, action, split_seed| {
            let local = split_local(train_data, cfg.local_val_per_class, split_seed)?;
            let mut roll_rng = ChaCha8Rng::seed_from_u64(rollout_seeds.next_u64());
            rollout(model, action, &local, cfg, &mut roll_rng)
        },
    )
}

/// Immutable inputs to one phase.
#[derive(Debug)]
pub struct PhaseInputs<'a> {
    /// Phase index, starting at 1 (phase 0 is plain pre-training).
    pub phase: usize,
    /// Previous phase's model.
    pub model: &'a ModelState,
    pub exemplars: &'a ExemplarStore,
    /// This phase's new-class training data.
    pub new_data: &'a LabeledDataset,
    /// Cumulative held-out test set; read exactly once, at final evaluation.
    pub test_set: &'a AuditedDataset,
}

/// Everything a phase produces.
#[derive(Debug)]
pub struct PhaseOutcome {
    pub model: ModelState,
    pub exemplars: ExemplarStore,
    pub policy: Option<PolicyState>,
    pub result: PhaseResult,
}

/// Execute one full phase: optional policy learning, final action selection,
/// incremental training on exemplars plus new data, held-out evaluation, and
/// exemplar selection for the new classes.
pub fn run_phase(
    inputs: &PhaseInputs<'_>,
    policy: Option<PolicyState>,
    ledger: &RewardLedger,
    selection: &ActionSelection,
    cfg: &RunConfig,
    phase_seed: u64,
) -> Result<PhaseOutcome> {
    run_phase_impl(inputs, policy, ledger, selection, cfg, phase_seed)
        .map_err(|e| e.in_phase(inputs.phase))
}

fn run_phase_impl(
    inputs: &PhaseInputs<'_>,
    policy: Option<PolicyState>,
    ledger: &RewardLedger,
    selection: &ActionSelection,
    cfg: &RunConfig,
    phase_seed: u64,
) -> Result<PhaseOutcome> {
    if inputs.phase == 0 {
        return Err(Error::InvalidParameter(
            "phase 0 is pre-training; run_phase starts at phase 1".into(),
        ));
    }
    let mut phase_rng = ChaCha8Rng::seed_from_u64(phase_seed);
    let policy_seed = phase_rng.next_u64();
    let action_seed = phase_rng.next_u64();
    let train_seed = phase_rng.next_u64();

    let dim = inputs.new_data.dim();
    let replay = inputs.exemplars.all_samples(dim)?;
    let train_data = LabeledDataset::concat(&[&replay, inputs.new_data])?;

    // Policy learning.
    let (policy, trace) = match (&selection.mode, policy) {
        (ActionMode::Online, Some(p)) => {
            if inputs.phase.is_multiple_of(cfg.policy_update_period) {
                let mut rng = ChaCha8Rng::seed_from_u64(policy_seed);
                let (p2, trace) = policy_learning_round(
                    inputs.model,
                    &train_data,
                    p,
                    ledger,
                    &selection.space,
                    cfg,
                    &mut rng,
                )?;
                (Some(p2), trace)
            } else {
                (Some(p), Vec::new())
            }
        }
        (ActionMode::Online, None) => {
            return Err(Error::InvalidParameter(
                "online mode requires a policy state".into(),
            ))
        }
        (ActionMode::Fixed(_), p) => (p, Vec::new()),
    };

    // Final action.
    let action_index = match selection.mode {
        ActionMode::Fixed(index) => index,
        ActionMode::Online => {
            let p = policy.as_ref().expect("online mode carries a policy");
            let mut rng = ChaCha8Rng::seed_from_u64(action_seed);
            p.sample(&mut rng)
        }
    };
    let action = selection.space.action_at(action_index)?;
    log::info!(
        "phase {}: applying action {action} (index {action_index})",
        inputs.phase
    );

    // CIL training on all data for M2 epochs, distilling from the old model.
    let mut train_rng = ChaCha8Rng::seed_from_u64(train_seed);
    let new_total = inputs
        .new_data
        .max_label()
        .map(|m| m + 1)
        .unwrap_or(0)
        .max(inputs.model.num_classes());
    let mut grown = inputs.model.clone();
    grown.grow_head(new_total, &mut train_rng)?;
    let theta = train_for_epochs(
        grown,
        Some(inputs.model),
        &action,
        cfg.tau,
        &train_data,
        cfg.m2_epochs,
        cfg.batch_size,
        &mut train_rng,
    )?;

    // Final evaluation: the only read of the held-out set.
    let means = match action.delta {
        Classifier::Ncm => Some(theta.class_means(&train_data)?),
        Classifier::Fc => None,
    };
    let test_reads_before_eval = inputs.test_set.read_count();
    if test_reads_before_eval != 0 {
        return Err(Error::ProtocolViolation {
            reads: test_reads_before_eval,
        });
    }
    let accuracy = theta.accuracy_on(inputs.test_set.read(), action.delta, means.as_ref())?;

    let exemplars = update_exemplars(inputs.exemplars, &theta, inputs.new_data)?;

    Ok(PhaseOutcome {
        result: PhaseResult {
            phase: inputs.phase,
            action_index: Some(action_index),
            action,
            accuracy,
            policy: policy.clone(),
            trace,
            test_reads_before_eval,
        },
        model: theta,
        exemplars,
        policy,
    })
}

/// Full experiment outcome: per-phase results plus the final artifacts.
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub phases: Vec<PhaseResult>,
    pub accuracies: Vec<f64>,
    /// Mean of the per-phase accuracies; the headline metric.
    pub average_accuracy: f64,
    pub ledger: RewardLedger,
    pub final_model: ModelState,
    pub final_policy: Option<PolicyState>,
}

fn write_checkpoint(
    dir: &Path,
    phase: usize,
    model: &ModelState,
    policy: Option<&PolicyState>,
    result: &PhaseResult,
) -> Result<()> {
    let phase_dir = dir.join(format!("phase_{phase}"));
    std::fs::create_dir_all(&phase_dir)?;
    std::fs::write(phase_dir.join("model.json"), model.to_json()?)?;
    if let Some(p) = policy {
        std::fs::write(phase_dir.join("policy.json"), p.to_json()?)?;
    }
    std::fs::write(
        phase_dir.join("result.json"),
        serde_json::to_string_pretty(result)?,
    )?;
    Ok(())
}

/// Run the whole stream: CE-only pre-training on phase 0, then [`run_phase`]
/// for each subsequent phase. When `checkpoint_dir` is given, each phase
/// writes `phase_<i>/model.json`, `phase_<i>/policy.json` (online runs), and
/// `phase_<i>/result.json`.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment(
    schedule: &PhaseSchedule,
    phase_train: &[LabeledDataset],
    phase_test: &[LabeledDataset],
    arch: Arch,
    selection: &ActionSelection,
    cfg: &RunConfig,
    seed: u64,
    checkpoint_dir: Option<&Path>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let phases = schedule.num_phases();
    if phase_train.len() != phases || phase_test.len() != phases {
        return Err(Error::Shape {
            what: "per-phase dataset lists".into(),
            expected: phases,
            got: phase_train.len().min(phase_test.len()),
        });
    }
    for d in phase_train.iter().chain(phase_test) {
        if d.dim() != arch.input_dim {
            return Err(Error::Shape {
                what: "dataset feature dimension".into(),
                expected: arch.input_dim,
                got: d.dim(),
            });
        }
    }

    let mut master = ChaCha8Rng::seed_from_u64(seed);

    // Phase 0: plain cross-entropy pre-training, FC evaluation, no policy.
    let phase0_seed = master.next_u64();
    let mut rng0 = ChaCha8Rng::seed_from_u64(phase0_seed);
    let classes0 = schedule.classes_per_phase[0].len();
    let phase0_action = Action::new(0.0, 0.0, cfg.phase0_lr, Classifier::Fc)?;
    let init = ModelState::random(arch, classes0, &mut rng0);
    let model0 = train_for_epochs(
        init,
        None,
        &phase0_action,
        cfg.tau,
        &phase_train[0],
        cfg.m2_epochs,
        cfg.batch_size,
        &mut rng0,
    )
    .map_err(|e| e.in_phase(0))?;
    let store = ExemplarStore::new(cfg.exemplar_budget)?;
    let mut exemplars =
        update_exemplars(&store, &model0, &phase_train[0]).map_err(|e| e.in_phase(0))?;

    let test0 = AuditedDataset::new(phase_test[0].clone());
    let reads0 = test0.read_count();
    let acc0 = model0
        .accuracy_on(test0.read(), Classifier::Fc, None)
        .map_err(|e| e.in_phase(0))?;
    let mut results = vec![PhaseResult {
        phase: 0,
        action_index: None,
        action: phase0_action,
        accuracy: acc0,
        policy: None,
        trace: Vec::new(),
        test_reads_before_eval: reads0,
    }];
    let mut model = model0;
    if let Some(dir) = checkpoint_dir {
        write_checkpoint(dir, 0, &model, None, &results[0])?;
    }

    let mut policy = match selection.mode {
        ActionMode::Online => Some(PolicyState::with_mix(
            selection.space.len(),
            cfg.xi,
            cfg.exploration_mix,
        )?),
        ActionMode::Fixed(_) => None,
    };
    let mut ledger = RewardLedger::new();

    for phase in 1..phases {
        let phase_seed = master.next_u64();
        let cumulative: Vec<&LabeledDataset> = phase_test[..=phase].iter().collect();
        let test_set = AuditedDataset::new(LabeledDataset::concat(&cumulative)?);
        let inputs = PhaseInputs {
            phase,
            model: &model,
            exemplars: &exemplars,
            new_data: &phase_train[phase],
            test_set: &test_set,
        };
        let outcome = run_phase(&inputs, policy.take(), &ledger, selection, cfg, phase_seed)?;
        ledger.push(outcome.result.accuracy)?;
        if let Some(dir) = checkpoint_dir {
            write_checkpoint(
                dir,
                phase,
                &outcome.model,
                outcome.policy.as_ref(),
                &outcome.result,
            )?;
        }
        model = outcome.model;
        exemplars = outcome.exemplars;
        policy = outcome.policy;
        results.push(outcome.result);
        log::info!(
            "phase {phase}: accuracy {:.4}",
            results.last().expect("just pushed").accuracy
        );
    }

    let accuracies: Vec<f64> = results.iter().map(|r| r.accuracy).collect();
    let average_accuracy = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    Ok(ExperimentOutcome {
        phases: results,
        accuracies,
        average_accuracy,
        ledger,
        final_model: model,
        final_policy: policy,
    })
}
