//! Downstream classifiers trained on the (noisy) labeled set.

mod lp;
mod sgc;

pub use lp::{lp_fit_predict, row_entropy, LpOutput};
pub use sgc::{
    sgc_fit, sgc_predict, weighted_cross_entropy, SgcHyper, SoftmaxModel, TrainingExample,
};

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};
use crate::graph::{Graph, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lp,
    Sgc,
}

impl std::str::FromStr for ModelKind {
    type Err = RimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(ModelKind::Lp),
            "sgc" => Ok(ModelKind::Sgc),
            other => Err(RimError::validation(format!("unknown model {other:?}"))),
        }
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(row: ArrayView1<'_, f64>) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Fraction of `split` nodes whose prediction equals the ground truth.
pub fn evaluate(predictions: &[usize], graph: &Graph, split: Split) -> Result<f64> {
    if predictions.len() != graph.num_nodes() {
        return Err(RimError::Dimension {
            expected: graph.num_nodes(),
            got: predictions.len(),
        });
    }
    let nodes = graph.splits().get(split);
    if nodes.is_empty() {
        return Err(RimError::validation(format!("{split:?} split is empty")));
    }
    let truth = graph.labels();
    let hits = nodes.iter().filter(|&&v| predictions[v] == truth[v]).count();
    Ok(hits as f64 / nodes.len() as f64)
}
