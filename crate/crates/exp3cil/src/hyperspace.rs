//! Hyperparameter actions and the discretized action space.
//!
//! An [`Action`] bundles the four per-phase hyperparameters: the logit-KD
//! weight `beta`, the feature-KD weight `gamma`, the learning rate `lambda`,
//! and the classifier type `delta`. The [`ActionSpace`] is the Cartesian
//! product of per-dimension value lists in a fixed lexicographic order
//! (`beta` outermost, `delta` innermost), so serialized policy weights stay
//! aligned to actions across restarts.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classifier used at prediction time: cosine fully-connected head or
/// nearest-class-mean over L2-normalized prototypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Classifier {
    Fc,
    Ncm,
}

impl Classifier {
    /// The binary indicator: 1 selects NCM, 0 selects the FC head.
    pub fn indicator(self) -> u8 {
        match self {
            Classifier::Fc => 0,
            Classifier::Ncm => 1,
        }
    }
}

impl TryFrom<u8> for Classifier {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Classifier::Fc),
            1 => Ok(Classifier::Ncm),
            other => Err(Error::InvalidGrid(format!(
                "delta must be 0 (FC) or 1 (NCM), got {other}"
            ))),
        }
    }
}

impl From<Classifier> for u8 {
    fn from(c: Classifier) -> u8 {
        c.indicator()
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classifier::Fc => write!(f, "fc"),
            Classifier::Ncm => write!(f, "ncm"),
        }
    }
}

/// One hyperparameter tuple; the bandit's arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: Classifier,
}

impl Action {
    pub fn new(beta: f64, gamma: f64, lambda: f64, delta: Classifier) -> Result<Self> {
        for (name, v) in [("beta", beta), ("gamma", gamma), ("lambda", lambda)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if beta < 0.0 || gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "KD weights must be nonnegative, got beta={beta}, gamma={gamma}"
            )));
        }
        if lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            beta,
            gamma,
            lambda,
            delta,
        })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(beta={} gamma={} lambda={} delta={})",
            self.beta, self.gamma, self.lambda, self.delta
        )
    }
}

/// Per-dimension value lists the action space is built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
    pub delta: Vec<Classifier>,
}

impl Default for GridSpec {
    /// 48-action default bracketing both low- and high-distillation regimes.
    fn default() -> Self {
        Self {
            beta: vec![0.0, 0.5, 1.0, 2.0],
            gamma: vec![0.0, 1.0, 5.0],
            lambda: vec![0.01, 0.05],
            delta: vec![Classifier::Fc, Classifier::Ncm],
        }
    }
}

/// Finite, ordered action space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    actions: Vec<Action>,
    grid: GridSpec,
}

fn check_dimension(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} value list is empty")));
    }
    for &v in values {
        if !v.is_finite() {
            return Err(Error::InvalidGrid(format!("{name} contains non-finite value")));
        }
    }
    for (i, &v) in values.iter().enumerate() {
        if values[..i].contains(&v) {
            return Err(Error::InvalidGrid(format!("{name} contains duplicate {v}")));
        }
    }
    Ok(())
}

impl GridSpec {
    /// Validate the value lists and enumerate the Cartesian product in
    /// lexicographic order, `beta` outermost and `delta` innermost.
    pub fn enumerate(&self) -> Result<Vec<Action>> {
        check_dimension("beta", &self.beta)?;
        check_dimension("gamma", &self.gamma)?;
        check_dimension("lambda", &self.lambda)?;
        if self.delta.is_empty() {
            return Err(Error::InvalidGrid("delta value list is empty".into()));
        }
        for (i, d) in self.delta.iter().enumerate() {
            if self.delta[..i].contains(d) {
                return Err(Error::InvalidGrid(format!("delta contains duplicate {d}")));
            }
        }
        if self.beta.iter().any(|&b| b < 0.0) || self.gamma.iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidGrid("KD weights must be nonnegative".into()));
        }
        if self.lambda.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidGrid("lambda values must be positive".into()));
        }

        let cardinality = self.beta.len() * self.gamma.len() * self.lambda.len() * self.delta.len();
        let mut actions = Vec::with_capacity(cardinality);
        for &beta in &self.beta {
            for &gamma in &self.gamma {
                for &lambda in &self.lambda {
                    for &delta in &self.delta {
                        actions.push(Action {
                            beta,
                            gamma,
                            lambda,
                            delta,
                        });
                    }
                }
            }
        }
        Ok(actions)
    }
}

impl ActionSpace {
    /// Build the Cartesian-product space from per-dimension value lists.
    ///
    /// Ordering is lexicographic with `beta` outermost and `delta` innermost;
    /// two builds from equal specs yield element-wise identical spaces.
    pub fn from_grid(grid: GridSpec) -> Result<Self> {
        let actions = grid.enumerate()?;
        if actions.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "grid cardinality {} < 2",
                actions.len()
            )));
        }
        Ok(Self { actions, grid })
    }

    /// Degenerate one-action space for fixed-hyperparameter runs. The bandit
    /// itself still refuses spaces this small; this exists so fixed baselines
    /// and the online method share the phase-loop code path.
    pub fn singleton(action: Action) -> Self {
        Self {
            actions: vec![action],
            grid: GridSpec {
                beta: vec![action.beta],
                gamma: vec![action.gamma],
                lambda: vec![action.lambda],
                delta: vec![action.delta],
            },
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// The `index`-th action in grid order.
    pub fn action_at(&self, index: usize) -> Result<Action> {
        self.actions
            .get(index)
            .copied()
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.actions.len(),
                what: "action space",
            })
    }

    /// Position of `action` in the space; inverse of [`action_at`](Self::action_at).
    pub fn index_of(&self, action: &Action) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == action)
            .ok_or(Error::ActionNotFound {
                beta: action.beta,
                gamma: action.gamma,
                lambda: action.lambda,
                delta: action.delta.indicator(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> GridSpec {
        GridSpec {
            beta: vec![0.0, 1.0],
            gamma: vec![0.0, 1.0],
            lambda: vec![0.1],
            delta: vec![Classifier::Fc, Classifier::Ncm],
        }
    }

    #[test]
    fn product_enumeration() {
        let space = ActionSpace::from_grid(small_grid()).unwrap();
        assert_eq!(space.len(), 8);
        let first = space.action_at(0).unwrap();
        assert_eq!(
            first,
            Action::new(0.0, 0.0, 0.1, Classifier::Fc).unwrap()
        );
        let last = space.action_at(7).unwrap();
        assert_eq!(
            last,
            Action::new(1.0, 1.0, 0.1, Classifier::Ncm).unwrap()
        );
    }

    #[test]
    fn default_grid_has_48_actions() {
        let space = ActionSpace::from_grid(GridSpec::default()).unwrap();
        assert_eq!(space.len(), 4 * 3 * 2 * 2);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let grid = GridSpec {
            beta: vec![1.0],
            gamma: vec![0.0],
            lambda: vec![0.1],
            delta: vec![Classifier::Fc],
        };
        assert!(matches!(
            ActionSpace::from_grid(grid),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn empty_dimension_rejected() {
        let mut grid = small_grid();
        grid.gamma.clear();
        assert!(ActionSpace::from_grid(grid).is_err());
    }

    #[test]
    fn duplicate_values_rejected() {
        let mut grid = small_grid();
        grid.beta = vec![0.0, 0.0];
        assert!(ActionSpace::from_grid(grid).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut grid = small_grid();
        grid.lambda = vec![0.0];
        assert!(ActionSpace::from_grid(grid).is_err());
        let mut grid = small_grid();
        grid.beta = vec![-1.0, 0.0];
        assert!(ActionSpace::from_grid(grid).is_err());
    }

    #[test]
    fn index_round_trip_over_full_grid() {
        let space = ActionSpace::from_grid(GridSpec::default()).unwrap();
        for i in 0..space.len() {
            let a = space.action_at(i).unwrap();
            assert_eq!(space.index_of(&a).unwrap(), i);
        }
    }

    #[test]
    fn index_of_first_element() {
        let space = ActionSpace::from_grid(small_grid()).unwrap();
        let a = space.action_at(0).unwrap();
        assert_eq!(space.index_of(&a).unwrap(), 0);
    }

    #[test]
    fn non_member_not_found() {
        let space = ActionSpace::from_grid(small_grid()).unwrap();
        let stranger = Action::new(9.0, 9.0, 9.0, Classifier::Fc).unwrap();
        assert!(matches!(
            space.index_of(&stranger),
            Err(Error::ActionNotFound { .. })
        ));
    }

    #[test]
    fn out_of_range_index() {
        let space = ActionSpace::from_grid(small_grid()).unwrap();
        assert!(matches!(
            space.action_at(8),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn builds_are_deterministic() {
        let a = ActionSpace::from_grid(GridSpec::default()).unwrap();
        let b = ActionSpace::from_grid(GridSpec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cardinality_law() {
        let grid = GridSpec {
            beta: vec![0.0, 1.0, 2.0],
            gamma: vec![0.0, 0.5],
            lambda: vec![0.01, 0.02, 0.03],
            delta: vec![Classifier::Ncm],
        };
        let space = ActionSpace::from_grid(grid).unwrap();
        assert_eq!(space.len(), 3 * 2 * 3);
    }

    #[test]
    fn action_validation() {
        assert!(Action::new(0.0, 0.0, 0.1, Classifier::Fc).is_ok());
        assert!(Action::new(-0.1, 0.0, 0.1, Classifier::Fc).is_err());
        assert!(Action::new(0.0, -0.1, 0.1, Classifier::Fc).is_err());
        assert!(Action::new(0.0, 0.0, 0.0, Classifier::Fc).is_err());
        assert!(Action::new(0.0, 0.0, f64::NAN, Classifier::Fc).is_err());
    }

    #[test]
    fn classifier_indicator_round_trip() {
        assert_eq!(Classifier::try_from(0u8).unwrap(), Classifier::Fc);
        assert_eq!(Classifier::try_from(1u8).unwrap(), Classifier::Ncm);
        assert!(Classifier::try_from(2u8).is_err());
        assert_eq!(Classifier::Ncm.indicator(), 1);
    }
}
