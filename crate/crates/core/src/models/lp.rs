use ndarray::{Array2, ArrayView1};

use super::argmax;
use crate::error::{Result, RimError};
use crate::graph::PropagationOperator;
use crate::reliability::LabeledSet;

/// Soft labels and hard predictions of a label-propagation run.
#[derive(Debug, Clone)]
pub struct LpOutput {
    pub soft: Array2<f64>,
    pub predictions: Vec<usize>,
    /// Rows that received no label mass; their prediction defaults to class 0.
    pub unreached: Vec<bool>,
}

/// Label propagation with clamping: `Y ← P·Y`, then labeled rows reset to
/// `r_i · onehot(ỹ_i)` (or the plain one-hot when `use_reliability` is off),
/// repeated `iters` times.
pub fn lp_fit_predict(
    op: &PropagationOperator<'_>,
    labeled: &LabeledSet,
    num_classes: usize,
    iters: usize,
    use_reliability: bool,
) -> Result<LpOutput> {
    if labeled.is_empty() {
        return Err(RimError::validation("label propagation needs at least one labeled node"));
    }
    if iters == 0 {
        return Err(RimError::validation("label propagation needs at least one iteration"));
    }
    let n = op.num_nodes();
    let mut seed = Array2::<f64>::zeros((n, num_classes));
    for e in labeled.entries() {
        if e.node >= n {
            return Err(RimError::Index { node: e.node, n });
        }
        if e.label >= num_classes {
            return Err(RimError::validation(format!(
                "label {} of node {} outside [0, {num_classes})",
                e.label, e.node
            )));
        }
        seed[[e.node, e.label]] = if use_reliability { e.quality } else { 1.0 };
    }
    let mut y = seed.clone();
    for _ in 0..iters {
        y = op.propagate_matrix(y.view())?;
        for e in labeled.entries() {
            y.row_mut(e.node).assign(&seed.row(e.node));
        }
    }
    let mut predictions = Vec::with_capacity(n);
    let mut unreached = Vec::with_capacity(n);
    for row in y.rows() {
        predictions.push(argmax(row));
        unreached.push(row.iter().all(|&v| v == 0.0));
    }
    Ok(LpOutput {
        soft: y,
        predictions,
        unreached,
    })
}

/// Shannon entropy (nats) of a soft-label row after normalization. An
/// all-zero row has the maximal entropy `ln c`.
pub fn row_entropy(row: ArrayView1<'_, f64>) -> f64 {
    let total: f64 = row.sum();
    if total <= 0.0 {
        return (row.len() as f64).ln();
    }
    -row.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            p * p.ln()
        })
        .sum::<f64>()
}
