use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RimError};
use crate::graph::{Graph, Splits};

fn default_train_frac() -> f64 {
    0.6
}
fn default_val_frac() -> f64 {
    0.2
}

/// Planted-partition stochastic block model with noisy one-hot features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SbmParams {
    pub blocks: usize,
    pub nodes_per_block: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub feature_dim: usize,
    /// Standard deviation of the Gaussian noise added to every feature.
    pub feature_noise: f64,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default = "default_val_frac")]
    pub val_frac: f64,
}

impl SbmParams {
    pub fn new(blocks: usize, nodes_per_block: usize, p_intra: f64, p_inter: f64) -> Self {
        SbmParams {
            blocks,
            nodes_per_block,
            p_intra,
            p_inter,
            feature_dim: blocks,
            feature_noise: 1.0,
            train_frac: default_train_frac(),
            val_frac: default_val_frac(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(RimError::validation(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.blocks == 0 || self.nodes_per_block == 0 {
            return Err(RimError::validation("need at least one block of at least one node"));
        }
        if self.feature_dim < self.blocks {
            return Err(RimError::validation(format!(
                "feature_dim {} is smaller than the block count {}",
                self.feature_dim, self.blocks
            )));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return Err(RimError::validation("feature_noise must be finite and >= 0"));
        }
        let fr = [self.train_frac, self.val_frac, 1.0 - self.train_frac - self.val_frac];
        if fr.iter().any(|f| !(-1e-12..=1.0).contains(f)) {
            return Err(RimError::validation("split fractions must lie in [0, 1] and sum to <= 1"));
        }
        Ok(())
    }
}

/// Samples a graph whose ground-truth label is the block id. Node `i`
/// belongs to block `i / nodes_per_block`.
pub fn generate_sbm(params: &SbmParams, seed: u64) -> Result<Graph> {
    params.validate()?;
    if params.p_intra <= params.p_inter {
        log::warn!(
            "p_intra ({}) <= p_inter ({}): blocks are not assortative",
            params.p_intra,
            params.p_inter
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.blocks * params.nodes_per_block;
    let block = |i: usize| i / params.nodes_per_block;

    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if block(i) == block(j) {
                params.p_intra
            } else {
                params.p_inter
            };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }

    let mut features = Array2::zeros((n, params.feature_dim));
    for i in 0..n {
        for f in 0..params.feature_dim {
            let noise: f64 = rng.sample(StandardNormal);
            let mean = if f == block(i) { 1.0 } else { 0.0 };
            features[[i, f]] = mean + params.feature_noise * noise;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_train = (params.train_frac * n as f64).round() as usize;
    let n_val = ((params.val_frac * n as f64).round() as usize).min(n - n_train);
    let take = |range: std::ops::Range<usize>| {
        let mut v = order[range].to_vec();
        v.sort_unstable();
        v
    };
    let splits = Splits {
        train: take(0..n_train),
        val: take(n_train..n_train + n_val),
        test: take(n_train + n_val..n),
    };

    Graph::from_edges(n, &edges)?
        .with_labels((0..n).map(block).collect(), params.blocks)?
        .with_features(features)?
        .with_splits(splits)
}
