//! Linear softmax classifier over propagated features.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Result, RimError};
use crate::reliability::LabeledSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SgcHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub weight_decay: f64,
}

impl Default for SgcHyper {
    fn default() -> Self {
        SgcHyper {
            learning_rate: 0.2,
            epochs: 300,
            weight_decay: 5e-5,
        }
    }
}

/// A labeled row and its loss weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingExample {
    pub node: usize,
    pub label: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub hyper: SgcHyper,
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

/// Mean weighted cross-entropy over `examples` plus `wd/2 · ‖W‖²`, with its
/// gradient with respect to the weights and the bias.
pub fn weighted_cross_entropy(
    features: ArrayView2<'_, f64>,
    examples: &[TrainingExample],
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    weight_decay: f64,
) -> (f64, Array2<f64>, Array1<f64>) {
    let m = examples.len().max(1) as f64;
    let c = weights.ncols();
    let rows: Vec<usize> = examples.iter().map(|e| e.node).collect();
    let x = features.select(Axis(0), &rows);
    let mut probs = x.dot(weights) + bias;
    let logits = probs.clone();
    softmax_rows(&mut probs);

    let mut loss = 0.0;
    // dL/dlogits = w_i (p_i - onehot) / m
    let mut delta = probs;
    for (i, e) in examples.iter().enumerate() {
        let row = logits.row(i);
        let max = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let lse = max + row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        loss += e.weight * (lse - row[e.label]);
        delta[[i, e.label]] -= 1.0;
        let scale = e.weight / m;
        delta.row_mut(i).mapv_inplace(|v| v * scale);
    }
    loss /= m;
    loss += 0.5 * weight_decay * weights.iter().map(|w| w * w).sum::<f64>();

    let grad_w = x.t().dot(&delta) + weights * weight_decay;
    let grad_b = if examples.is_empty() {
        Array1::zeros(c)
    } else {
        delta.sum_axis(Axis(0))
    };
    (loss, grad_w, grad_b)
}

/// Full-batch gradient descent from zero weights. Loss weights are the
/// labeled qualities when `use_reliability` is on, else 1.
pub fn sgc_fit(
    features: ArrayView2<'_, f64>,
    labeled: &LabeledSet,
    num_classes: usize,
    hyper: SgcHyper,
    use_reliability: bool,
) -> Result<SoftmaxModel> {
    if labeled.is_empty() {
        return Err(RimError::validation("softmax training needs at least one labeled node"));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(RimError::validation("features contain non-finite values"));
    }
    let n = features.nrows();
    let examples: Vec<TrainingExample> = labeled
        .entries()
        .iter()
        .map(|e| {
            if e.node >= n {
                return Err(RimError::Index { node: e.node, n });
            }
            if e.label >= num_classes {
                return Err(RimError::validation(format!(
                    "label {} outside [0, {num_classes})",
                    e.label
                )));
            }
            Ok(TrainingExample {
                node: e.node,
                label: e.label,
                weight: if use_reliability { e.quality } else { 1.0 },
            })
        })
        .collect::<Result<_>>()?;

    let d = features.ncols();
    let mut weights = Array2::zeros((d, num_classes));
    let mut bias = Array1::zeros(num_classes);
    for epoch in 0..hyper.epochs {
        let (loss, gw, gb) =
            weighted_cross_entropy(features, &examples, &weights, &bias, hyper.weight_decay);
        if !loss.is_finite() {
            return Err(RimError::Divergence { epoch });
        }
        weights.scaled_add(-hyper.learning_rate, &gw);
        bias.scaled_add(-hyper.learning_rate, &gb);
    }
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(RimError::Divergence { epoch: hyper.epochs });
    }
    Ok(SoftmaxModel {
        weights,
        bias,
        hyper,
    })
}

/// Class probabilities `softmax(XW + b)` and their argmax labels.
pub fn sgc_predict(
    model: &SoftmaxModel,
    features: ArrayView2<'_, f64>,
) -> Result<(Array2<f64>, Vec<usize>)> {
    if features.ncols() != model.weights.nrows() {
        return Err(RimError::Dimension {
            expected: model.weights.nrows(),
            got: features.ncols(),
        });
    }
    let mut probs = features.dot(&model.weights) + &model.bias;
    softmax_rows(&mut probs);
    let labels = probs.rows().into_iter().map(argmax).collect();
    Ok((probs, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn set(entries: &[(usize, usize, f64)]) -> LabeledSet {
        let mut l = LabeledSet::new(1.0).unwrap();
        for &(v, y, q) in entries {
            l.insert(v, y, q).unwrap();
        }
        l
    }

    #[test]
    fn zero_weights_predict_uniform() {
        let model = SoftmaxModel {
            weights: Array2::zeros((3, 4)),
            bias: Array1::zeros(4),
            hyper: SgcHyper::default(),
        };
        let x = array![[1.0, -2.0, 0.5], [0.0, 0.0, 3.0]];
        let (p, labels) = sgc_predict(&model, x.view()).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        assert_eq!(labels, vec![0, 0]);
        assert!(sgc_predict(&model, array![[1.0, 2.0]].view()).is_err());
    }

    #[test]
    fn conflicting_duplicates_stay_uncertain() {
        let x = array![[1.0, 2.0], [1.0, 2.0]];
        let l = set(&[(0, 0, 1.0), (1, 1, 1.0)]);
        let model = sgc_fit(x.view(), &l, 2, SgcHyper::default(), true).unwrap();
        let (p, _) = sgc_predict(&model, x.view()).unwrap();
        assert!((p[[0, 0]] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn separable_toy_set_is_fit() {
        let x = array![[2.0, 0.1], [1.5, -0.2], [1.8, 0.3], [-0.1, 2.0], [0.2, 1.7], [-0.3, 1.4]];
        let l = set(&[(0, 0, 1.0), (1, 0, 1.0), (2, 0, 1.0), (3, 1, 1.0), (4, 1, 1.0), (5, 1, 1.0)]);
        let model = sgc_fit(x.view(), &l, 2, SgcHyper::default(), false).unwrap();
        let (_, labels) = sgc_predict(&model, x.view()).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn unit_weights_match_unweighted_loss() {
        let x = array![[0.3, -1.0], [1.2, 0.4], [0.0, 0.9]];
        let w = array![[0.1, -0.2, 0.3], [0.5, 0.0, -0.4]];
        let b = array![0.05, -0.1, 0.0];
        let ex: Vec<_> = [(0, 2), (1, 0), (2, 1)]
            .iter()
            .map(|&(node, label)| TrainingExample { node, label, weight: 1.0 })
            .collect();
        let (loss, _, _) = weighted_cross_entropy(x.view(), &ex, &w, &b, 0.0);
        let mut plain = 0.0;
        for e in &ex {
            let logits: Vec<f64> = (0..3).map(|k| x.row(e.node).dot(&w.column(k)) + b[k]).collect();
            let z: f64 = logits.iter().map(|v| v.exp()).sum();
            plain -= (logits[e.label].exp() / z).ln();
        }
        assert!((loss - plain / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_weight_contributes_nothing() {
        let x = array![[0.3, -1.0], [1.2, 0.4]];
        let w = array![[0.1, -0.2], [0.5, 0.0]];
        let b = array![0.05, -0.1];
        let with_zero = [
            TrainingExample { node: 0, label: 1, weight: 0.0 },
            TrainingExample { node: 1, label: 0, weight: 1.0 },
        ];
        let (_, gw, gb) = weighted_cross_entropy(x.view(), &with_zero, &w, &b, 0.0);
        let (_, gw1, gb1) = weighted_cross_entropy(x.view(), &with_zero[1..], &w, &b, 0.0);
        // the mean divides by the example count, so compare after rescaling
        assert!(gw.iter().zip(gw1.iter()).all(|(a, c)| (2.0 * a - c).abs() < 1e-15));
        assert!(gb.iter().zip(gb1.iter()).all(|(a, c)| (2.0 * a - c).abs() < 1e-15));
    }

    #[test]
    fn divergence_is_reported() {
        let x = array![[1e200, 1e200], [-1e200, 1e200]];
        let l = set(&[(0, 0, 1.0), (1, 1, 1.0)]);
        let hyper = SgcHyper { learning_rate: 1e10, epochs: 50, weight_decay: 0.0 };
        assert!(matches!(
            sgc_fit(x.view(), &l, 2, hyper, false),
            Err(RimError::Divergence { .. })
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let x = array![[0.3, -1.0], [1.2, 0.4], [0.0, 0.9], [0.7, 0.7]];
        let l = set(&[(0, 0, 0.6), (1, 1, 0.9), (3, 2, 0.4)]);
        let a = sgc_fit(x.view(), &l, 3, SgcHyper::default(), true).unwrap();
        let b = sgc_fit(x.view(), &l, 3, SgcHyper::default(), true).unwrap();
        assert_eq!(a, b);
    }
}
