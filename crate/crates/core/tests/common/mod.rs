#![allow(dead_code)]

use rand::Rng;
use rim::graph::Graph;

/// Erdős–Rényi graph on `n` nodes.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Dense `D̃⁻¹(A + I)` built straight from the edge list.
pub fn dense_walk(graph: &Graph) -> Vec<Vec<f64>> {
    let n = graph.num_nodes();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
    }
    for (u, v) in graph.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    for row in &mut a {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    a
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            let x = a[i][l];
            if x != 0.0 {
                for j in 0..m {
                    out[i][j] += x * bl[j];
                }
            }
        }
    }
    out
}

/// `Pᵏ` by repeated dense multiplication.
pub fn dense_power(graph: &Graph, k: usize) -> Vec<Vec<f64>> {
    let p = dense_walk(graph);
    let n = p.len();
    let mut out: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..k {
        out = matmul(&out, &p);
    }
    out
}

/// Activated-node count for `sources` given as `(node, quality)`, computed
/// from a dense `Pᵏ`.
pub fn coverage(pk: &[Vec<f64>], sources: &[(usize, f64)], theta: f64) -> usize {
    (0..pk.len())
        .filter(|&j| {
            sources
                .iter()
                .map(|&(s, q)| q * pk[j][s])
                .fold(0.0, f64::max)
                > theta
        })
        .count()
}
