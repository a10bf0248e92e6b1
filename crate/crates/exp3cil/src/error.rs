//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Action spaces need at least two arms for a bandit policy to be meaningful.
    #[error("invalid action space: {num_actions} action(s), need at least 2")]
    InvalidActionSpace { num_actions: usize },

    /// A scalar parameter failed validation (wrong sign, range, or non-finite).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Rewards fed to the policy must already be normalized to [0, 1].
    #[error("reward {reward} outside [0, 1]; normalize upstream before updating the policy")]
    RewardOutOfRange { reward: f64 },

    /// The chosen arm's probability vanished, so the importance weight is undefined.
    #[error("importance weight undefined: p(action {index}) = {probability}")]
    ImportanceWeight { index: usize, probability: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        index: usize,
        len: usize,
        what: &'static str,
    },

    #[error("action ({beta}, {gamma}, {lambda}, {delta}) is not a member of the action space")]
    ActionNotFound {
        beta: f64,
        gamma: f64,
        lambda: f64,
        delta: u8,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch for {what}: expected {expected}, got {got}")]
    Shape {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("degenerate cosine: {0} has zero norm")]
    DegenerateCosine(String),

    #[error("label {label} out of range for model with {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("non-finite gradient encountered in {0}")]
    NonFiniteGradient(&'static str),

    #[error("insufficient data: class {class} has no samples")]
    InsufficientData { class: usize },

    #[error("cannot evaluate on an empty dataset")]
    EmptyEvaluation,

    #[error("batch is empty")]
    EmptyBatch,

    /// KD weights require a previous-phase model to distill from.
    #[error("no old model supplied but beta={beta}, gamma={gamma}; both must be 0 in the first phase")]
    MissingTeacher { beta: f64, gamma: f64 },

    #[error("nearest-class-mean prediction requires class means")]
    MissingClassMeans,

    #[error("exemplar budget {requested} exceeds class {class} size {available}")]
    Budget {
        class: usize,
        requested: usize,
        available: usize,
    },

    #[error("herding budget {requested} exceeds class size {available}")]
    HerdingBudget { requested: usize, available: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("parse error in {path} at row {row}: {reason}")]
    Parse {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("cannot balance local validation set: class {class} has {available} sample(s), need more than {needed}")]
    Balance {
        class: usize,
        available: usize,
        needed: usize,
    },

    #[error("rollout produced no rewards")]
    EmptyRollout,

    /// The held-out test set was read before the phase's final evaluation.
    #[error("protocol violation: test set read {reads} time(s) before final evaluation")]
    ProtocolViolation { reads: u64 },

    #[error("phase {phase}: {source}")]
    Phase {
        phase: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("policy iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("summaries do not share provenance: {0}")]
    Provenance(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Attach phase context to an upstream error.
    pub fn in_phase(self, phase: usize) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }

    /// Attach policy-iteration context to an upstream error.
    pub fn in_iteration(self, iteration: usize) -> Self {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
