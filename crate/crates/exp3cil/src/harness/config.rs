//! Experiment configuration: the TOML file schema, CLI overrides, and the
//! fully-resolved form that runs echo into their summaries so no result
//! depends on an unstated default.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::datastream::Setting;
use crate::error::{Error, Result};
use crate::hyperspace::{Action, Classifier, GridSpec};
use crate::learner::{Activation, Arch};
use crate::orchestrator::{default_m1, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub kind: DatasetKind,
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub per_class_train: usize,
    pub per_class_test: usize,
    /// CSV mode only: headerless `label,v1,...,vdim` files.
    pub train_path: Option<String>,
    pub test_path: Option<String>,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Synthetic,
            classes: 20,
            dim: 16,
            separation: 4.0,
            per_class_train: 30,
            per_class_test: 10,
            train_path: None,
            test_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    /// The incremental phase count N; TFH adds a half-size phase 0 on top.
    pub phases: usize,
    /// "tfh", "tfs", or "both".
    pub setting: String,
    /// Permute class order by this seed before partitioning.
    pub class_order_seed: Option<u64>,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            phases: 5,
            setting: "both".into(),
            class_order_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub delta: Vec<u8>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            beta: g.beta,
            gamma: g.gamma,
            lambda: g.lambda,
            delta: g.delta.into_iter().map(Classifier::indicator).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorSection {
    pub policy_iters: usize,
    pub lookahead: usize,
    pub m2_epochs: usize,
    /// Defaults to `ceil(0.1 * m2_epochs)` when absent.
    pub m1_epochs: Option<usize>,
    pub local_val_per_class: usize,
    pub policy_update_period: usize,
    pub batch_size: usize,
    pub tau: f64,
    pub xi: f64,
    pub exploration_mix: f64,
    pub exemplar_budget: usize,
    pub phase0_lr: f64,
}

impl Default for OrchestratorSection {
    fn default() -> Self {
        let rc = RunConfig::default();
        Self {
            policy_iters: rc.policy_iters,
            lookahead: rc.lookahead,
            m2_epochs: rc.m2_epochs,
            m1_epochs: None,
            local_val_per_class: rc.local_val_per_class,
            policy_update_period: rc.policy_update_period,
            batch_size: rc.batch_size,
            tau: rc.tau,
            xi: rc.xi,
            exploration_mix: rc.exploration_mix,
            exemplar_budget: rc.exemplar_budget,
            phase0_lr: rc.phase0_lr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub cosine_scale: f64,
    /// "tanh" or "identity".
    pub activation: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        let a = Arch::default();
        Self {
            hidden_dim: a.hidden_dim,
            feature_dim: a.feature_dim,
            cosine_scale: a.cosine_scale,
            activation: "tanh".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seeds: Vec<u64>,
    /// "online", "fixed", "grid_search_fixed", or "ablation".
    pub mode: String,
    pub out: Option<String>,
    pub workers: usize,
    pub checkpoints: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seeds: vec![1],
            mode: "online".into(),
            out: None,
            workers: 1,
            checkpoints: false,
        }
    }
}

/// The fixed action for `fixed` mode; also the frozen baseline values the
/// ablation modes pin non-optimized hyperparameters to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSection {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSection {
    /// "beta_gamma", "beta_gamma_delta", or "beta_gamma_delta_lambda".
    pub subset: String,
}

/// The on-disk configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: DatasetSection,
    pub schedule: ScheduleSection,
    pub grid: GridSection,
    pub orchestrator: OrchestratorSection,
    pub model: ModelSection,
    pub run: RunSection,
    pub fixed: Option<FixedSection>,
    pub ablation: Option<AblationSection>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        Ok(toml::from_str(&text)?)
    }
}

/// Flag-level overrides applied on top of a [`FileConfig`].
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub setting: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub workers: Option<usize>,
    pub out: Option<String>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub delta: Option<u8>,
    pub ablate: Option<String>,
    pub checkpoints: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Online,
    Fixed,
    GridSearchFixed,
    Ablation,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "online" => Ok(Mode::Online),
            "fixed" => Ok(Mode::Fixed),
            "grid_search_fixed" | "grid-search" | "grid_search" => Ok(Mode::GridSearchFixed),
            "ablation" => Ok(Mode::Ablation),
            other => Err(Error::Config(format!(
                "unknown mode '{other}', expected online|fixed|grid-search|ablation"
            ))),
        }
    }
}

/// Which hyperparameters an ablation run optimizes; the rest are frozen at
/// the fixed-baseline values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationSubset {
    BetaGamma,
    BetaGammaDelta,
    BetaGammaDeltaLambda,
}

impl AblationSubset {
    pub fn label(self) -> &'static str {
        match self {
            AblationSubset::BetaGamma => "beta_gamma",
            AblationSubset::BetaGammaDelta => "beta_gamma_delta",
            AblationSubset::BetaGammaDeltaLambda => "beta_gamma_delta_lambda",
        }
    }
}

impl FromStr for AblationSubset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "beta_gamma" => Ok(AblationSubset::BetaGamma),
            "beta_gamma_delta" => Ok(AblationSubset::BetaGammaDelta),
            "beta_gamma_delta_lambda" => Ok(AblationSubset::BetaGammaDeltaLambda),
            other => Err(Error::Config(format!(
                "unknown ablation subset '{other}', expected beta_gamma|beta_gamma_delta|beta_gamma_delta_lambda"
            ))),
        }
    }
}

/// A fully-resolved experiment configuration. Everything a run depends on is
/// explicit here, and the whole struct is embedded in the run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub dataset: DatasetSection,
    pub schedule: ScheduleSection,
    pub grid: GridSpec,
    pub orchestrator: RunConfig,
    pub arch: Arch,
    pub mode: Mode,
    pub settings: Vec<Setting>,
    pub seeds: Vec<u64>,
    pub fixed_action: Option<Action>,
    pub ablation: Option<AblationSubset>,
    pub workers: usize,
    pub out: Option<String>,
    pub checkpoints: bool,
}

fn parse_settings(text: &str) -> Result<Vec<Setting>> {
    match text.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![Setting::Tfh, Setting::Tfs]),
        other => Ok(vec![other.parse()?]),
    }
}

/// Merge a file config with CLI overrides and validate the result.
pub fn resolve(file: &FileConfig, overrides: &Overrides) -> Result<ResolvedConfig> {
    let mode: Mode = overrides
        .mode
        .as_deref()
        .unwrap_or(&file.run.mode)
        .parse()?;
    let settings = parse_settings(
        overrides
            .setting
            .as_deref()
            .unwrap_or(&file.schedule.setting),
    )?;
    let seeds = overrides
        .seeds
        .clone()
        .unwrap_or_else(|| file.run.seeds.clone());
    if seeds.is_empty() {
        return Err(Error::Config("seeds list is empty".into()));
    }
    let workers = overrides.workers.unwrap_or(file.run.workers).max(1);

    let dataset = file.dataset.clone();
    match dataset.kind {
        DatasetKind::Synthetic => {}
        DatasetKind::Csv => {
            if dataset.train_path.is_none() || dataset.test_path.is_none() {
                return Err(Error::Config(
                    "csv datasets need both train_path and test_path".into(),
                ));
            }
        }
    }
    if dataset.classes < 2 {
        return Err(Error::Config("need at least 2 classes".into()));
    }

    let mut delta_values = Vec::with_capacity(file.grid.delta.len());
    for &d in &file.grid.delta {
        delta_values.push(Classifier::try_from(d)?);
    }
    let grid = GridSpec {
        beta: file.grid.beta.clone(),
        gamma: file.grid.gamma.clone(),
        lambda: file.grid.lambda.clone(),
        delta: delta_values,
    };

    let o = &file.orchestrator;
    let orchestrator = RunConfig {
        policy_iters: o.policy_iters,
        lookahead: o.lookahead,
        m2_epochs: o.m2_epochs,
        m1_epochs: o.m1_epochs.unwrap_or_else(|| default_m1(o.m2_epochs)),
        local_val_per_class: o.local_val_per_class,
        policy_update_period: o.policy_update_period,
        batch_size: o.batch_size,
        tau: o.tau,
        xi: o.xi,
        exploration_mix: o.exploration_mix,
        exemplar_budget: o.exemplar_budget,
        phase0_lr: o.phase0_lr,
    };
    orchestrator.validate()?;

    let activation = match file.model.activation.to_ascii_lowercase().as_str() {
        "tanh" => Activation::Tanh,
        "identity" => Activation::Identity,
        other => {
            return Err(Error::Config(format!(
                "unknown activation '{other}', expected tanh or identity"
            )))
        }
    };
    let arch = Arch {
        input_dim: dataset.dim,
        hidden_dim: file.model.hidden_dim,
        feature_dim: file.model.feature_dim,
        activation,
        cosine_scale: file.model.cosine_scale,
    };
    if arch.hidden_dim == 0 || arch.feature_dim == 0 || arch.input_dim == 0 {
        return Err(Error::Config("model dimensions must be positive".into()));
    }
    if !arch.cosine_scale.is_finite() || arch.cosine_scale <= 0.0 {
        return Err(Error::Config("cosine_scale must be positive".into()));
    }

    // A fixed action comes from CLI flags first, then the [fixed] section.
    let fixed_action = {
        let base = file.fixed.clone();
        let beta = overrides.beta.or(base.as_ref().map(|f| f.beta));
        let gamma = overrides.gamma.or(base.as_ref().map(|f| f.gamma));
        let lambda = overrides.lambda.or(base.as_ref().map(|f| f.lambda));
        let delta = overrides.delta.or(base.as_ref().map(|f| f.delta));
        match (beta, gamma, lambda, delta) {
            (Some(b), Some(g), Some(l), Some(d)) => {
                Some(Action::new(b, g, l, Classifier::try_from(d)?)?)
            }
            (None, None, None, None) => None,
            _ => {
                return Err(Error::Config(
                    "fixed action needs all of beta, gamma, lambda, delta".into(),
                ))
            }
        }
    };
    if mode == Mode::Fixed && fixed_action.is_none() {
        return Err(Error::Config(
            "fixed mode needs an action: set [fixed] in the config or pass --beta/--gamma/--lambda/--delta".into(),
        ));
    }

    let ablation = match (&overrides.ablate, &file.ablation) {
        (Some(s), _) => Some(s.parse()?),
        (None, Some(a)) => Some(a.subset.parse()?),
        (None, None) => None,
    };
    if mode == Mode::Ablation {
        if ablation.is_none() {
            return Err(Error::Config(
                "ablation mode needs a subset: set [ablation] or pass --ablate".into(),
            ));
        }
        if fixed_action.is_none() {
            return Err(Error::Config(
                "ablation mode freezes non-optimized hyperparameters at the [fixed] baseline; set it".into(),
            ));
        }
    }

    Ok(ResolvedConfig {
        dataset,
        schedule: ScheduleSection {
            phases: file.schedule.phases,
            setting: settings
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("+"),
            class_order_seed: file.schedule.class_order_seed,
        },
        grid,
        orchestrator,
        arch,
        mode,
        settings,
        seeds,
        fixed_action,
        ablation,
        workers,
        out: overrides.out.clone().or_else(|| file.run.out.clone()),
        checkpoints: overrides.checkpoints || file.run.checkpoints,
    })
}

/// The grid an ablation run searches: optimized dimensions keep their value
/// lists, frozen dimensions collapse to the baseline action's value.
pub fn ablation_grid(grid: &GridSpec, subset: AblationSubset, baseline: &Action) -> GridSpec {
    let mut out = grid.clone();
    match subset {
        AblationSubset::BetaGamma => {
            out.lambda = vec![baseline.lambda];
            out.delta = vec![baseline.delta];
        }
        AblationSubset::BetaGammaDelta => {
            out.lambda = vec![baseline.lambda];
        }
        AblationSubset::BetaGammaDeltaLambda => {}
    }
    out
}
