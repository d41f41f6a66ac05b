use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use super::Graph;
use crate::error::{Result, RimError};

/// Row-normalized walk matrix `P = D̃⁻¹(A + I)` together with a step count.
#[derive(Debug, Clone)]
pub struct PropagationOperator<'g> {
    graph: &'g Graph,
    k: usize,
    row_weight: Vec<f64>,
}

const PAR_MIN_ROWS: usize = 2048;

impl<'g> PropagationOperator<'g> {
    pub fn new(graph: &'g Graph, k: usize) -> Self {
        let row_weight = (0..graph.num_nodes())
            .map(|i| 1.0 / (graph.degree(i) + 1) as f64)
            .collect();
        PropagationOperator {
            graph,
            k,
            row_weight,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn steps(&self) -> usize {
        self.k
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    /// Weight shared by every entry of row `i`, self-loop included.
    #[inline]
    pub fn row_weight(&self, i: usize) -> f64 {
        self.row_weight[i]
    }

    /// Entry `P[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j || self.graph.has_edge(i, j) {
            self.row_weight[i]
        } else {
            0.0
        }
    }

    #[inline]
    fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        let s: f64 = v[i] + self.graph.neighbors(i).iter().map(|&j| v[j]).sum::<f64>();
        s * self.row_weight[i]
    }

    /// One application `P·v`.
    pub fn propagate(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.num_nodes();
        if v.len() != n {
            return Err(RimError::Dimension {
                expected: n,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; n];
        self.propagate_into(v, &mut out);
        Ok(out)
    }

    fn propagate_into(&self, v: &[f64], out: &mut [f64]) {
        if out.len() >= PAR_MIN_ROWS {
            out.par_iter_mut()
                .enumerate()
                .for_each(|(i, o)| *o = self.row_dot(i, v));
        } else {
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.row_dot(i, v);
            }
        }
    }

    /// `Pᵏ·v` with the operator's own step count.
    pub fn propagate_k(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.propagate_steps(v, self.k)
    }

    pub fn propagate_steps(&self, v: &[f64], steps: usize) -> Result<Vec<f64>> {
        let mut cur = v.to_vec();
        if steps == 0 {
            if cur.len() != self.num_nodes() {
                return Err(RimError::Dimension {
                    expected: self.num_nodes(),
                    got: cur.len(),
                });
            }
            return Ok(cur);
        }
        let mut next = self.propagate(&cur)?;
        for _ in 1..steps {
            std::mem::swap(&mut cur, &mut next);
            self.propagate_into(&cur, &mut next);
        }
        Ok(next)
    }

    /// `P·M` for a dense row-major matrix with `n` rows.
    pub fn propagate_matrix(&self, m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let n = self.num_nodes();
        if m.nrows() != n {
            return Err(RimError::Dimension {
                expected: n,
                got: m.nrows(),
            });
        }
        let d = m.ncols();
        let src = m.as_standard_layout();
        let src = src.as_slice().expect("standard layout");
        let mut out = vec![0.0; n * d];
        let row = |(i, o): (usize, &mut [f64])| {
            o.copy_from_slice(&src[i * d..(i + 1) * d]);
            for &j in self.graph.neighbors(i) {
                for (a, b) in o.iter_mut().zip(&src[j * d..(j + 1) * d]) {
                    *a += b;
                }
            }
            let w = self.row_weight[i];
            o.iter_mut().for_each(|a| *a *= w);
        };
        if d > 0 {
            if n >= PAR_MIN_ROWS {
                out.par_chunks_mut(d).enumerate().for_each(row);
            } else {
                out.chunks_mut(d).enumerate().for_each(row);
            }
        }
        Ok(Array2::from_shape_vec((n, d), out).expect("shape"))
    }

    /// Smoothed features `X̂ = Pᵏ X`; `k = 0` returns `X` unchanged.
    pub fn smooth_features(&self) -> Result<Array2<f64>> {
        let x = self.graph.features().ok_or(RimError::MissingFeatures)?;
        let mut cur = x.clone();
        for _ in 0..self.k {
            cur = self.propagate_matrix(cur.view())?;
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn two_node_half_split() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let op = PropagationOperator::new(&g, 1);
        assert_eq!(op.propagate(&[1.0, 0.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn path_two_steps_from_first_node() {
        let g = path3();
        let op = PropagationOperator::new(&g, 2);
        let out = op.propagate_k(&[1.0, 0.0, 0.0]).unwrap();
        let expected = [5.0 / 12.0, 5.0 / 18.0, 1.0 / 6.0];
        for (a, b) in out.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ones_are_fixed() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (3, 4)]).unwrap();
        let op = PropagationOperator::new(&g, 3);
        for x in op.propagate_k(&[1.0; 5]).unwrap() {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_node_keeps_its_value() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let op = PropagationOperator::new(&g, 1);
        assert_eq!(op.propagate(&[0.0, 0.0, 7.0]).unwrap()[2], 7.0);
        assert_eq!(op.entry(2, 2), 1.0);
    }

    #[test]
    fn length_mismatch() {
        let g = path3();
        let op = PropagationOperator::new(&g, 1);
        assert!(matches!(
            op.propagate(&[1.0]),
            Err(RimError::Dimension { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn smoothing() {
        let g = Graph::from_edges(2, &[(0, 1)])
            .unwrap()
            .with_features(array![[1.0, 0.0], [0.0, 1.0]])
            .unwrap();
        let x0 = PropagationOperator::new(&g, 0).smooth_features().unwrap();
        assert_eq!(x0, array![[1.0, 0.0], [0.0, 1.0]]);
        let x1 = PropagationOperator::new(&g, 1).smooth_features().unwrap();
        assert_eq!(x1, array![[0.5, 0.5], [0.5, 0.5]]);
    }

    #[test]
    fn smoothing_requires_features() {
        let g = path3();
        assert!(matches!(
            PropagationOperator::new(&g, 1).smooth_features(),
            Err(RimError::MissingFeatures)
        ));
    }

    #[test]
    fn constant_column_is_preserved() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (1, 3)])
            .unwrap()
            .with_features(array![[3.0, 1.0], [3.0, -2.0], [3.0, 0.0], [3.0, 5.0]])
            .unwrap();
        let x = PropagationOperator::new(&g, 4).smooth_features().unwrap();
        for i in 0..4 {
            assert!((x[[i, 0]] - 3.0).abs() < 1e-12);
        }
    }
}
