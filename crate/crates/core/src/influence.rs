//! k-step influence, reliable influence quantity and activation coverage.
//!
//! The influence of a source on node `j` is `[Pᵏ]_{j,source}`: the probability
//! that a k-step lazy random walk from `j` ends at the source. Rows of `Pᵏ`
//! sum to one, so the normalized and raw influence scores coincide.
//!
//! A node is activated when its largest quality-scaled influence from the
//! labeled set exceeds `theta`. Coverage `F` is the number of activated
//! nodes, which is monotone and submodular when qualities are held fixed.

use std::sync::OnceLock;

use crate::error::{Result, RimError};
use crate::graph::PropagationOperator;
use crate::reliability::LabeledSet;

/// Column `Pᵏe_source`, stored over its non-zero support.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceColumn {
    source: usize,
    n: usize,
    nodes: Vec<usize>,
    scores: Vec<f64>,
}

impl InfluenceColumn {
    pub fn source(&self) -> usize {
        self.source
    }

    /// `I(v_j, v_source, k)`.
    pub fn score(&self, j: usize) -> f64 {
        match self.nodes.binary_search(&j) {
            Ok(p) => self.scores[p],
            Err(_) => 0.0,
        }
    }

    /// Non-zero `(node, score)` pairs in node order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().copied().zip(self.scores.iter().copied())
    }

    pub fn support_len(&self) -> usize {
        self.nodes.len()
    }

    /// Total influence mass `Σ_j I(v_j, v_source, k)`.
    pub fn mass(&self) -> f64 {
        self.scores.iter().sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, s) in self.iter() {
            out[j] = s;
        }
        out
    }
}

/// Computes `Pᵏe_source` by k sparse propagation steps restricted to the
/// growing k-hop neighborhood of the source.
pub fn influence_column(op: &PropagationOperator<'_>, source: usize) -> Result<InfluenceColumn> {
    let g = op.graph();
    g.check_node(source)?;
    let n = g.num_nodes();
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut in_support = vec![false; n];
    let mut support = vec![source];
    in_support[source] = true;
    cur[source] = 1.0;
    for _ in 0..op.steps() {
        let frontier_end = support.len();
        for p in 0..frontier_end {
            for &j in g.neighbors(support[p]) {
                if !in_support[j] {
                    in_support[j] = true;
                    support.push(j);
                }
            }
        }
        for &i in &support {
            let s: f64 = cur[i] + g.neighbors(i).iter().map(|&j| cur[j]).sum::<f64>();
            next[i] = s * op.row_weight(i);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    support.sort_unstable();
    let (nodes, scores): (Vec<usize>, Vec<f64>) = support
        .into_iter()
        .map(|j| (j, cur[j]))
        .filter(|&(_, s)| s > 0.0)
        .unzip();
    Ok(InfluenceColumn {
        source,
        n,
        nodes,
        scores,
    })
}

/// Quality-scaled influence `r · I(·, v_source, k)` as a dense vector.
pub fn reliable_quantity(column: &InfluenceColumn, quality: f64) -> Result<Vec<f64>> {
    check_quality(quality)?;
    let mut out = column.to_dense();
    out.iter_mut().for_each(|x| *x *= quality);
    Ok(out)
}

fn check_quality(quality: f64) -> Result<()> {
    if (0.0..=1.0).contains(&quality) {
        Ok(())
    } else {
        Err(RimError::validation(format!(
            "quality must be in [0, 1], got {quality}"
        )))
    }
}

/// Lazily computed influence columns shared across threads.
pub struct InfluenceCache<'g> {
    op: PropagationOperator<'g>,
    columns: Vec<OnceLock<InfluenceColumn>>,
}

impl<'g> InfluenceCache<'g> {
    pub fn new(op: PropagationOperator<'g>) -> Self {
        let n = op.num_nodes();
        InfluenceCache {
            op,
            columns: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn operator(&self) -> &PropagationOperator<'g> {
        &self.op
    }

    pub fn num_nodes(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, source: usize) -> Result<&InfluenceColumn> {
        let slot = self.columns.get(source).ok_or(RimError::Index {
            node: source,
            n: self.columns.len(),
        })?;
        Ok(slot.get_or_init(|| {
            influence_column(&self.op, source).expect("source checked above")
        }))
    }
}

/// Running per-node maximum of quality-scaled influence over a labeled set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationState {
    q_max: Vec<f64>,
    best_source: Vec<Option<usize>>,
    theta: f64,
    activated: usize,
}

impl ActivationState {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(RimError::validation(format!(
                "theta must be a finite non-negative number, got {theta}"
            )));
        }
        Ok(ActivationState {
            q_max: vec![0.0; n],
            best_source: vec![None; n],
            theta,
            activated: 0,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn q_max(&self) -> &[f64] {
        &self.q_max
    }

    pub fn best_source(&self, j: usize) -> Option<usize> {
        self.best_source[j]
    }

    pub fn is_activated(&self, j: usize) -> bool {
        self.q_max[j] > self.theta
    }

    /// `F = |σ(V_l)|`.
    pub fn activated_count(&self) -> usize {
        self.activated
    }

    pub fn activated_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.q_max.len()).filter(move |&j| self.is_activated(j))
    }

    /// Folds one labeled source into the state. Returns the nodes that crossed
    /// the threshold because of it.
    pub fn add(&mut self, column: &InfluenceColumn, quality: f64) -> Result<Vec<usize>> {
        check_quality(quality)?;
        if column.n != self.q_max.len() {
            return Err(RimError::Dimension {
                expected: self.q_max.len(),
                got: column.n,
            });
        }
        let source = column.source;
        let mut crossed = Vec::new();
        for (j, score) in column.iter() {
            let q = quality * score;
            let cur = self.q_max[j];
            let wins = q > cur
                || (q == cur && q > 0.0 && self.best_source[j].is_some_and(|b| source < b));
            if wins {
                if q > self.theta && cur <= self.theta {
                    self.activated += 1;
                    crossed.push(j);
                }
                self.q_max[j] = q;
                self.best_source[j] = Some(source);
            }
        }
        Ok(crossed)
    }
}

/// Builds the activation state of `labeled` from scratch using each entry's
/// stored quality.
pub fn build_activation(
    op: &PropagationOperator<'_>,
    labeled: &LabeledSet,
    theta: f64,
) -> Result<ActivationState> {
    let mut state = ActivationState::new(op.num_nodes(), theta)?;
    for e in labeled.entries() {
        state.add(&influence_column(op, e.node)?, e.quality)?;
    }
    Ok(state)
}

/// As [`build_activation`], reading columns from a cache and overriding each
/// entry's quality through `quality_of`.
pub fn build_activation_cached(
    cache: &InfluenceCache<'_>,
    labeled: &LabeledSet,
    theta: f64,
    quality_of: impl Fn(&crate::reliability::LabeledEntry) -> f64,
) -> Result<ActivationState> {
    let mut state = ActivationState::new(cache.num_nodes(), theta)?;
    for e in labeled.entries() {
        state.add(cache.column(e.node)?, quality_of(e))?;
    }
    Ok(state)
}

/// Number of nodes the candidate would newly activate:
/// `|{ j : r·I(v_j, v, k) > θ ≥ q_max[j] }|`.
pub fn marginal_gain(state: &ActivationState, column: &InfluenceColumn, quality: f64) -> usize {
    let theta = state.theta;
    column
        .iter()
        .filter(|&(j, s)| quality * s > theta && state.q_max[j] <= theta)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn path_columns() {
        let g = path3();
        let c1 = influence_column(&PropagationOperator::new(&g, 1), 0).unwrap();
        close(&c1.to_dense(), &[0.5, 1.0 / 3.0, 0.0], 1e-15);
        let c2 = influence_column(&PropagationOperator::new(&g, 2), 0).unwrap();
        close(&c2.to_dense(), &[5.0 / 12.0, 5.0 / 18.0, 1.0 / 6.0], 1e-12);
        let c0 = influence_column(&PropagationOperator::new(&g, 0), 2).unwrap();
        assert_eq!(c0.to_dense(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn column_matches_dense_propagation() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 4), (4, 5)]).unwrap();
        let op = PropagationOperator::new(&g, 3);
        for s in 0..6 {
            let mut e = vec![0.0; 6];
            e[s] = 1.0;
            assert_eq!(influence_column(&op, s).unwrap().to_dense(), op.propagate_k(&e).unwrap());
        }
    }

    #[test]
    fn out_of_range_source() {
        let g = path3();
        assert!(matches!(
            influence_column(&PropagationOperator::new(&g, 1), 3),
            Err(RimError::Index { node: 3, n: 3 })
        ));
    }

    #[test]
    fn reliable_quantity_scales() {
        let g = path3();
        let col = influence_column(&PropagationOperator::new(&g, 2), 0).unwrap();
        assert_eq!(reliable_quantity(&col, 0.0).unwrap(), vec![0.0; 3]);
        assert_eq!(reliable_quantity(&col, 1.0).unwrap(), col.to_dense());
        close(
            &reliable_quantity(&col, 0.7).unwrap(),
            &[0.2917, 0.1944, 0.1167],
            1e-4,
        );
        assert!(reliable_quantity(&col, 1.2).is_err());
    }

    #[test]
    fn activation_on_path() {
        let g = path3();
        let op = PropagationOperator::new(&g, 2);
        let empty = LabeledSet::new(0.7).unwrap();
        let st = build_activation(&op, &empty, 0.2).unwrap();
        assert_eq!(st.activated_count(), 0);
        assert!(st.q_max().iter().all(|&q| q == 0.0));

        let mut l = LabeledSet::new(0.7).unwrap();
        l.insert(0, 0, 0.7).unwrap();
        let st = build_activation(&op, &l, 0.2).unwrap();
        assert_eq!(st.activated_nodes().collect::<Vec<_>>(), vec![0]);
        let st = build_activation(&op, &l, 0.0).unwrap();
        assert_eq!(st.activated_nodes().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(st.best_source(2), Some(0));
    }

    #[test]
    fn gains_on_path() {
        let g = path3();
        let op = PropagationOperator::new(&g, 2);
        let col0 = influence_column(&op, 0).unwrap();
        let st = ActivationState::new(3, 0.2).unwrap();
        assert_eq!(marginal_gain(&st, &col0, 0.7), 1);
        let st0 = ActivationState::new(3, 0.0).unwrap();
        for s in 0..3 {
            assert_eq!(marginal_gain(&st0, &influence_column(&op, s).unwrap(), 0.3), 3);
        }
        // a dominated candidate adds nothing
        let mut st = ActivationState::new(3, 0.0).unwrap();
        st.add(&col0, 1.0).unwrap();
        assert_eq!(marginal_gain(&st, &col0, 0.5), 0);
    }

    #[test]
    fn best_source_ties_go_to_lowest_id() {
        // 0 and 2 are symmetric around 1
        let g = path3();
        let op = PropagationOperator::new(&g, 1);
        let mut a = ActivationState::new(3, 0.0).unwrap();
        a.add(&influence_column(&op, 2).unwrap(), 1.0).unwrap();
        a.add(&influence_column(&op, 0).unwrap(), 1.0).unwrap();
        let mut b = ActivationState::new(3, 0.0).unwrap();
        b.add(&influence_column(&op, 0).unwrap(), 1.0).unwrap();
        b.add(&influence_column(&op, 2).unwrap(), 1.0).unwrap();
        assert_eq!(a.best_source(1), Some(0));
        assert_eq!(a, b);
    }

    #[test]
    fn cache_agrees_with_direct() {
        let g = path3();
        let cache = InfluenceCache::new(PropagationOperator::new(&g, 2));
        let op = PropagationOperator::new(&g, 2);
        for s in 0..3 {
            assert_eq!(cache.column(s).unwrap(), &influence_column(&op, s).unwrap());
        }
        assert!(cache.column(7).is_err());
    }
}
