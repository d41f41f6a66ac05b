use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SbmParams;
use crate::error::{Result, RimError};
use crate::models::{ModelKind, SgcHyper};
use crate::selection::Strategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    /// Directory holding `edges.txt`, `labels.txt`, `splits.json` and
    /// optionally `features.csv` / `features.txt`.
    Path(PathBuf),
    Synthetic(SbmParams),
}

/// A selector plus its reliability switches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MethodRepr")]
pub struct MethodSpec {
    pub name: String,
    pub strategy: Strategy,
    pub reliable_selection: bool,
    pub reliable_training: bool,
}

fn yes() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MethodRepr {
    Preset(String),
    Full {
        name: String,
        strategy: Strategy,
        #[serde(default = "yes")]
        reliable_selection: bool,
        #[serde(default = "yes")]
        reliable_training: bool,
    },
}

impl TryFrom<MethodRepr> for MethodSpec {
    type Error = RimError;

    fn try_from(r: MethodRepr) -> Result<Self> {
        match r {
            MethodRepr::Preset(name) => MethodSpec::preset(&name),
            MethodRepr::Full {
                name,
                strategy,
                reliable_selection,
                reliable_training,
            } => Ok(MethodSpec {
                name,
                strategy,
                reliable_selection,
                reliable_training,
            }),
        }
    }
}

impl MethodSpec {
    /// Named configurations: `rim`, the ablations `no_rt`, `no_rs`, `no_rts`,
    /// and the plain baselines `random`, `degree`, `lp_me`, `lp_mre`, which
    /// run without reliability weighting.
    pub fn preset(name: &str) -> Result<Self> {
        let (strategy, rs, rt) = match name {
            "rim" => (Strategy::Rim, true, true),
            "no_rt" => (Strategy::Rim, true, false),
            "no_rs" => (Strategy::Rim, false, true),
            "no_rts" => (Strategy::Rim, false, false),
            "random" => (Strategy::Random, false, false),
            "degree" => (Strategy::Degree, false, false),
            "lp_me" => (Strategy::LpMe, false, false),
            "lp_mre" => (Strategy::LpMre, false, false),
            other => return Err(RimError::validation(format!("unknown method preset {other:?}"))),
        };
        Ok(MethodSpec {
            name: name.to_string(),
            strategy,
            reliable_selection: rs,
            reliable_training: rt,
        })
    }
}

fn default_alphas() -> Vec<f64> {
    vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5]
}
fn default_k() -> usize {
    2
}
fn default_theta() -> f64 {
    0.05
}
fn default_reps() -> usize {
    10
}
fn default_lp_iters() -> usize {
    10
}
fn default_mre() -> usize {
    500
}

/// Declarative experiment grid: methods × alphas × budgets × repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub model: ModelKind,
    pub methods: Vec<MethodSpec>,
    /// Oracle labeling accuracies.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    pub budgets: Vec<usize>,
    /// Labels per batch; the class count when absent.
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_lp_iters")]
    pub lp_iters: usize,
    #[serde(default)]
    pub sgc: SgcHyper,
    #[serde(default = "default_mre")]
    pub mre_max_candidates: usize,
    /// Fill the `seconds` column of results.csv. Off by default so that the
    /// file is byte-reproducible; wall times always go to timings.csv.
    #[serde(default)]
    pub record_timing: bool,
    /// Write one selection trace per run under `traces/`.
    #[serde(default = "yes")]
    pub write_traces: bool,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RimError::io(path, e))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() || self.alphas.is_empty() || self.budgets.is_empty() {
            return Err(RimError::validation("methods, alphas and budgets must be non-empty"));
        }
        if self.repetitions == 0 {
            return Err(RimError::validation("repetitions must be at least 1"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 1.0)) {
            return Err(RimError::validation(format!("alpha {a} outside (0, 1]")));
        }
        let mut names: Vec<&str> = self.methods.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(RimError::validation("method names must be unique"));
        }
        Ok(())
    }
}
