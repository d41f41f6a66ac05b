//! Label reliability and influence quality.
//!
//! A freshly labeled node's quality is a weighted vote over previously
//! labeled nodes that received the same oracle label, each vote being the
//! posterior probability that the new label is correct given the similarity
//! between the two nodes.

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};

/// What a similarity matrix was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMode {
    /// Smoothed node features `PᵏX`.
    Feature,
    /// Soft labels of a label-propagation run.
    Label,
}

/// Row matrix used to compare nodes by cosine similarity.
#[derive(Debug, Clone)]
pub struct SimilaritySource {
    mode: SimilarityMode,
    matrix: Array2<f64>,
    norms: Vec<f64>,
}

impl SimilaritySource {
    pub fn new(mode: SimilarityMode, matrix: Array2<f64>) -> Self {
        let norms = matrix
            .rows()
            .into_iter()
            .map(|r| r.dot(&r).sqrt())
            .collect();
        SimilaritySource {
            mode,
            matrix,
            norms,
        }
    }

    pub fn mode(&self) -> SimilarityMode {
        self.mode
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(i)
    }
}

/// Cosine similarity of rows `i` and `j`, clamped below at zero. A zero row
/// has similarity 0 with everything.
pub fn similarity(src: &SimilaritySource, i: usize, j: usize) -> Result<f64> {
    let n = src.num_rows();
    for v in [i, j] {
        if v >= n {
            return Err(RimError::Index { node: v, n });
        }
    }
    let (ni, nj) = (src.norms[i], src.norms[j]);
    if ni == 0.0 || nj == 0.0 {
        return Ok(0.0);
    }
    let cos = src.row(i).dot(&src.row(j)) / (ni * nj);
    Ok(cos.clamp(0.0, 1.0))
}

/// Probability that a node's oracle label is correct given that it matches
/// the label of a reference node with similarity `s`, under an oracle that
/// is right with probability `alpha` and otherwise uniform over the other
/// `c - 1` classes: `αs / (αs + (1-α)(1-s)/(c-1))`.
pub fn label_reliability(alpha: f64, s: f64, c: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(RimError::validation(format!(
            "alpha must be in (0, 1], got {alpha}"
        )));
    }
    if c < 2 {
        return Err(RimError::validation(format!("need at least 2 classes, got {c}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(RimError::validation(format!(
            "similarity must be in [0, 1], got {s}"
        )));
    }
    let agree = alpha * s;
    let denom = agree + (1.0 - alpha) * (1.0 - s) / (c - 1) as f64;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((agree / denom).clamp(0.0, 1.0))
}

/// One queried node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledEntry {
    pub node: usize,
    /// Label returned by the oracle, possibly wrong.
    pub label: usize,
    pub quality: f64,
    pub batch: usize,
}

#[derive(Deserialize)]
struct LabeledSetRepr {
    alpha: f64,
    entries: Vec<LabeledEntry>,
}

/// Ordered labeled nodes with their influence qualities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LabeledSetRepr")]
pub struct LabeledSet {
    alpha: f64,
    entries: Vec<LabeledEntry>,
    #[serde(skip)]
    position: HashMap<usize, usize>,
}

impl TryFrom<LabeledSetRepr> for LabeledSet {
    type Error = RimError;

    fn try_from(repr: LabeledSetRepr) -> Result<Self> {
        let mut set = LabeledSet::new(repr.alpha)?;
        for e in repr.entries {
            set.push(e)?;
        }
        Ok(set)
    }
}

impl LabeledSet {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RimError::validation(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        Ok(LabeledSet {
            alpha,
            entries: Vec::new(),
            position: HashMap::new(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn push(&mut self, entry: LabeledEntry) -> Result<()> {
        if self.position.contains_key(&entry.node) {
            return Err(RimError::validation(format!(
                "node {} already labeled",
                entry.node
            )));
        }
        check_quality(entry.quality)?;
        if let Some(last) = self.entries.last() {
            if entry.batch < last.batch {
                return Err(RimError::validation(format!(
                    "batch index {} follows {}",
                    entry.batch, last.batch
                )));
            }
        }
        self.position.insert(entry.node, self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    /// Convenience for building sets by hand.
    pub fn insert(&mut self, node: usize, label: usize, quality: f64) -> Result<()> {
        let batch = self.entries.last().map_or(0, |e| e.batch);
        self.push(LabeledEntry {
            node,
            label,
            quality,
            batch,
        })
    }

    pub fn entries(&self) -> &[LabeledEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.position.contains_key(&node)
    }

    pub fn get(&self, node: usize) -> Option<&LabeledEntry> {
        self.position.get(&node).map(|&p| &self.entries[p])
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.node)
    }

    pub fn set_quality(&mut self, node: usize, quality: f64) -> Result<()> {
        check_quality(quality)?;
        let p = *self
            .position
            .get(&node)
            .ok_or_else(|| RimError::validation(format!("node {node} is not labeled")))?;
        self.entries[p].quality = quality;
        Ok(())
    }

    /// Copy with every quality replaced by `quality`.
    pub fn with_uniform_quality(&self, quality: f64) -> Result<Self> {
        check_quality(quality)?;
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| e.quality = quality);
        Ok(out)
    }

    /// Entries whose batch index is below `batch`.
    pub fn before_batch(&self, batch: usize) -> Result<Self> {
        let mut out = LabeledSet::new(self.alpha)?;
        for e in self.entries.iter().filter(|e| e.batch < batch) {
            out.push(*e)?;
        }
        Ok(out)
    }
}

fn check_quality(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(RimError::validation(format!(
            "quality must be in [0, 1], got {q}"
        )))
    }
}

/// Re-estimates the quality of `new_nodes` by weighted voting over the other
/// labeled nodes carrying the same oracle label. All nodes read pre-update
/// qualities, so the order of `new_nodes` is irrelevant. With no same-label
/// reference a node's quality is reset to `alpha`.
pub fn update_quality(
    labeled: &mut LabeledSet,
    new_nodes: &[usize],
    src: &SimilaritySource,
    c: usize,
) -> Result<()> {
    let alpha = labeled.alpha;
    let mut updates = Vec::with_capacity(new_nodes.len());
    for &j in new_nodes {
        let target = *labeled
            .get(j)
            .ok_or_else(|| RimError::validation(format!("node {j} is not labeled")))?;
        let refs: Vec<&LabeledEntry> = labeled
            .entries
            .iter()
            .filter(|e| e.node != j && e.label == target.label)
            .collect();
        let total: f64 = refs.iter().map(|e| e.quality).sum();
        let q = if refs.is_empty() {
            alpha
        } else if total == 0.0 {
            // every reference has zero quality, fall back to an unweighted vote
            let mut acc = 0.0;
            for e in &refs {
                acc += label_reliability(alpha, similarity(src, e.node, j)?, c)?;
            }
            acc / refs.len() as f64
        } else {
            let mut acc = 0.0;
            for e in &refs {
                let rel = label_reliability(alpha, similarity(src, e.node, j)?, c)?;
                acc += e.quality / total * rel;
            }
            acc
        };
        updates.push((j, q.clamp(0.0, 1.0)));
    }
    for (j, q) in updates {
        labeled.set_quality(j, q)?;
    }
    Ok(())
}
