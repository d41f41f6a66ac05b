//! Graph storage, the normalized walk operator and dataset ingestion.
//!
//! Adjacency is kept in compressed sparse row form with sorted, deduplicated
//! neighbor lists. Self-loops are never stored: the propagation operator adds
//! them logically so that row `i` of `P = D̃⁻¹Ã` has `deg(i) + 1` entries of
//! weight `1 / (deg(i) + 1)`.

mod io;
mod propagation;

pub use io::{load_dataset, load_dataset_dir, read_features, write_dataset_dir, DatasetPaths};
pub use propagation::PropagationOperator;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};

/// Disjoint train/val/test node sets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Splits {
    #[serde(default)]
    pub train: Vec<usize>,
    #[serde(default)]
    pub val: Vec<usize>,
    #[serde(default)]
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Splits {
    pub fn get(&self, split: Split) -> &[usize] {
        match split {
            Split::Train => &self.train,
            Split::Val => &self.val,
            Split::Test => &self.test,
        }
    }
}

/// Undirected graph with optional dense node features and ground-truth labels.
#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    features: Option<Array2<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
    splits: Splits,
}

impl Graph {
    /// Builds the structure from an edge list. Reversed and repeated pairs are
    /// merged; a self-loop is rejected. Labels default to class 0 of a single
    /// class and splits are empty until set.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(RimError::Index { node: u, n });
            }
            if v >= n {
                return Err(RimError::Index { node: v, n });
            }
            if u == v {
                return Err(RimError::validation(format!("self-loop on node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(edges.len() * 2);
        offsets.push(0);
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Ok(Graph {
            n,
            offsets,
            neighbors,
            features: None,
            labels: vec![0; n],
            num_classes: 1,
            splits: Splits::default(),
        })
    }

    pub fn with_labels(mut self, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.len() != self.n {
            return Err(RimError::Dimension {
                expected: self.n,
                got: labels.len(),
            });
        }
        if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(RimError::validation(format!(
                "label {label} of node {node} outside [0, {num_classes})"
            )));
        }
        self.labels = labels;
        self.num_classes = num_classes;
        Ok(self)
    }

    pub fn with_features(mut self, features: Array2<f64>) -> Result<Self> {
        if features.nrows() != self.n {
            return Err(RimError::Dimension {
                expected: self.n,
                got: features.nrows(),
            });
        }
        self.features = Some(features);
        Ok(self)
    }

    /// Sets the splits after checking range and pairwise disjointness.
    pub fn with_splits(mut self, splits: Splits) -> Result<Self> {
        let mut owner = vec![None::<&str>; self.n];
        for (name, nodes) in [
            ("train", &splits.train),
            ("val", &splits.val),
            ("test", &splits.test),
        ] {
            for &v in nodes {
                if v >= self.n {
                    return Err(RimError::Index { node: v, n: self.n });
                }
                if let Some(prev) = owner[v] {
                    return Err(RimError::validation(format!(
                        "node {v} appears in both {prev} and {name} splits"
                    )));
                }
                owner[v] = Some(name);
            }
        }
        self.splits = splits;
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    pub fn features(&self) -> Option<&Array2<f64>> {
        self.features.as_ref()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn splits(&self) -> &Splits {
        &self.splits
    }

    pub fn check_node(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(RimError::Index { node: v, n: self.n })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversed_pairs_are_merged() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn neighbor_lists_are_symmetric() {
        let g = Graph::from_edges(5, &[(0, 3), (4, 1), (2, 3), (3, 0), (1, 2)]).unwrap();
        for u in 0..5 {
            for &v in g.neighbors(u) {
                assert!(g.has_edge(v, u));
                assert_ne!(u, v);
            }
        }
    }

    #[test]
    fn self_loop_rejected() {
        assert!(Graph::from_edges(2, &[(0, 0)]).is_err());
    }

    #[test]
    fn label_out_of_range() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(matches!(
            g.with_labels(vec![0, 2], 2),
            Err(RimError::Validation(_))
        ));
    }

    #[test]
    fn overlapping_splits_rejected() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let splits = Splits {
            train: vec![0, 1],
            val: vec![1],
            test: vec![2],
        };
        assert!(matches!(g.with_splits(splits), Err(RimError::Validation(_))));
    }

    #[test]
    fn empty_val_and_test_allowed() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let splits = Splits {
            train: vec![0, 1, 2],
            ..Default::default()
        };
        assert!(g.with_splits(splits).is_ok());
    }
}
