//! Query selection: reliable influence maximization and baselines.

mod al_loop;
mod baselines;
mod greedy;

pub use al_loop::{run_al_loop, AlRun};
pub use baselines::{baseline_select, BaselineContext};
pub use greedy::{greedy_batch, select_batch, GreedyOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};
use crate::influence::build_activation;
use crate::graph::PropagationOperator;
use crate::reliability::{LabeledSet, SimilarityMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Rim,
    Random,
    Degree,
    LpMe,
    LpMre,
}

impl std::str::FromStr for Strategy {
    type Err = RimError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rim" => Strategy::Rim,
            "random" => Strategy::Random,
            "degree" => Strategy::Degree,
            "lp_me" => Strategy::LpMe,
            "lp_mre" => Strategy::LpMre,
            other => return Err(RimError::validation(format!("unknown strategy {other:?}"))),
        })
    }
}

fn default_theta() -> f64 {
    0.05
}
fn default_k() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_lp_iters() -> usize {
    10
}
fn default_mre_candidates() -> usize {
    500
}

/// Parameters of one active-learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectorConfig {
    /// Total number of labels to acquire.
    pub budget: usize,
    /// Labels per batch; the class count when absent.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    pub mode: SimilarityMode,
    /// Use estimated qualities in the selection objective.
    #[serde(default = "default_true")]
    pub reliable_selection: bool,
    /// Use estimated qualities as training weights.
    #[serde(default = "default_true")]
    pub reliable_training: bool,
    pub strategy: Strategy,
    #[serde(default)]
    pub seed: u64,
    /// Label-propagation iterations for label-mode similarity and LP baselines.
    #[serde(default = "default_lp_iters")]
    pub lp_iters: usize,
    /// Candidate subsample size for LP-MRE.
    #[serde(default = "default_mre_candidates")]
    pub mre_max_candidates: usize,
}

impl SelectorConfig {
    pub fn new(budget: usize, mode: SimilarityMode, strategy: Strategy) -> Self {
        SelectorConfig {
            budget,
            batch_size: None,
            theta: default_theta(),
            k: default_k(),
            mode,
            reliable_selection: true,
            reliable_training: true,
            strategy,
            seed: 0,
            lp_iters: default_lp_iters(),
            mre_max_candidates: default_mre_candidates(),
        }
    }

    pub fn effective_batch_size(&self, num_classes: usize) -> usize {
        self.batch_size.unwrap_or(num_classes.max(1))
    }

    pub fn validate(&self, num_classes: usize, train_len: usize) -> Result<()> {
        let b = self.effective_batch_size(num_classes);
        if b == 0 || b > self.budget {
            return Err(RimError::validation(format!(
                "need 0 < batch size ({b}) <= budget ({})",
                self.budget
            )));
        }
        if self.budget > train_len {
            return Err(RimError::validation(format!(
                "budget {} exceeds the {train_len} training nodes",
                self.budget
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(RimError::validation(format!("theta must be >= 0, got {}", self.theta)));
        }
        if self.lp_iters == 0 {
            return Err(RimError::validation("lp_iters must be at least 1"));
        }
        Ok(())
    }

    /// Whether qualities are estimated at all.
    pub fn tracks_quality(&self) -> bool {
        self.reliable_selection || self.reliable_training
    }
}

/// One selected batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub index: usize,
    /// Picks in selection order.
    pub picks: Vec<usize>,
    /// Marginal coverage gain of each pick.
    pub gains: Vec<usize>,
    /// Objective value after each pick.
    pub objective: Vec<usize>,
    /// Activated nodes at the end of selection.
    pub activated: usize,
    /// `(node, quality)` of the batch after the quality update.
    pub qualities: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub batches: Vec<BatchRecord>,
    /// Labeled node whose influence first pushed each node over the threshold.
    pub first_activator: Vec<Option<usize>>,
}

/// Coverage objective `F(V_l) = |σ(V_l)|`.
pub fn objective(op: &PropagationOperator<'_>, labeled: &LabeledSet, theta: f64) -> Result<usize> {
    Ok(build_activation(op, labeled, theta)?.activated_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn objective_on_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let op = PropagationOperator::new(&g, 2);
        let mut l = LabeledSet::new(0.7).unwrap();
        assert_eq!(objective(&op, &l, 0.2).unwrap(), 0);
        l.insert(0, 0, 0.7).unwrap();
        assert_eq!(objective(&op, &l, 0.2).unwrap(), 1);
        let l = l.with_uniform_quality(0.01).unwrap();
        assert_eq!(objective(&op, &l, 0.0).unwrap(), 3);
    }

    #[test]
    fn config_json_is_strict() {
        let ok = r#"{"budget": 8, "mode": "label", "strategy": "rim"}"#;
        let cfg: SelectorConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.theta, 0.05);
        assert_eq!(cfg.k, 2);
        assert_eq!(cfg.effective_batch_size(4), 4);
        let bad = r#"{"budget": 8, "mode": "label", "strategy": "rim", "bogus": 1}"#;
        assert!(serde_json::from_str::<SelectorConfig>(bad).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SelectorConfig::new(4, SimilarityMode::Feature, Strategy::Rim);
        assert!(cfg.validate(2, 10).is_ok());
        assert!(cfg.validate(5, 10).is_err());
        assert!(cfg.validate(2, 3).is_err());
        cfg.theta = -0.1;
        assert!(cfg.validate(2, 10).is_err());
    }
}
