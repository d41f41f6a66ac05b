use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RimError};

/// Labeler that returns the true class with probability `alpha` and
/// otherwise a class drawn uniformly from the remaining `c - 1`.
#[derive(Debug, Clone)]
pub struct NoisyOracle<'a> {
    alpha: f64,
    num_classes: usize,
    truth: &'a [usize],
    rng: ChaCha8Rng,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(alpha: f64, num_classes: usize, truth: &'a [usize], seed: u64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(RimError::validation(format!(
                "alpha must be in (0, 1], got {alpha}"
            )));
        }
        if num_classes == 0 || (num_classes == 1 && alpha < 1.0) {
            return Err(RimError::validation(format!(
                "a noisy oracle needs at least 2 classes, got {num_classes}"
            )));
        }
        if let Some(&bad) = truth.iter().find(|&&y| y >= num_classes) {
            return Err(RimError::validation(format!(
                "ground-truth label {bad} outside [0, {num_classes})"
            )));
        }
        Ok(NoisyOracle {
            alpha,
            num_classes,
            truth,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Draws a label for `v`. Every call advances the stream, so repeated
    /// queries of one node are independent.
    pub fn query(&mut self, v: usize) -> Result<usize> {
        let y = *self.truth.get(v).ok_or(RimError::Index {
            node: v,
            n: self.truth.len(),
        })?;
        let u: f64 = self.rng.random();
        if u < self.alpha {
            return Ok(y);
        }
        let wrong = self.rng.random_range(0..self.num_classes - 1);
        Ok(if wrong >= y { wrong + 1 } else { wrong })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_oracle_is_exact() {
        let truth = vec![0, 3, 1, 2, 2];
        let mut o = NoisyOracle::new(1.0, 4, &truth, 9).unwrap();
        for _ in 0..20 {
            for v in 0..truth.len() {
                assert_eq!(o.query(v).unwrap(), truth[v]);
            }
        }
    }

    #[test]
    fn same_seed_same_labels() {
        let truth: Vec<usize> = (0..50).map(|i| i % 5).collect();
        let mut a = NoisyOracle::new(0.6, 5, &truth, 42).unwrap();
        let mut b = NoisyOracle::new(0.6, 5, &truth, 42).unwrap();
        for v in 0..50 {
            assert_eq!(a.query(v).unwrap(), b.query(v).unwrap());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let truth = vec![0, 1];
        assert!(NoisyOracle::new(0.0, 2, &truth, 0).is_err());
        assert!(NoisyOracle::new(1.01, 2, &truth, 0).is_err());
        assert!(NoisyOracle::new(0.5, 1, &[0], 0).is_err());
        assert!(NoisyOracle::new(0.5, 2, &[0, 2], 0).is_err());
        let mut o = NoisyOracle::new(0.5, 2, &truth, 0).unwrap();
        assert!(o.query(2).is_err());
    }

    #[test]
    fn wrong_labels_never_equal_truth() {
        let truth = vec![2; 1000];
        let mut o = NoisyOracle::new(0.01, 3, &truth, 1).unwrap();
        let wrong = (0..1000).filter(|&v| o.query(v).unwrap() != 2).count();
        assert!(wrong > 950);
    }
}
