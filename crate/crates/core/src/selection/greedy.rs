//! Greedy coverage maximization, naive and lazy (CELF).
//!
//! Candidates are ranked by `(marginal gain, influence mass, -node id)`.
//! Because gains only shrink as the state grows, a stale heap entry is an
//! upper bound on its current key; the lazy variant therefore picks exactly
//! what the naive scan picks.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::SelectorConfig;
use crate::error::Result;
use crate::influence::{build_activation_cached, marginal_gain, ActivationState, InfluenceCache};
use crate::reliability::LabeledSet;

#[derive(Debug, Clone, Copy)]
struct Key {
    gain: usize,
    mass: f64,
    node: usize,
}

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .cmp(&other.gain)
            .then_with(|| self.mass.total_cmp(&other.mass))
            .then_with(|| other.node.cmp(&self.node))
    }
}

#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Stale {
    key: Key,
    round: usize,
}

/// Picks with their gains, the objective after each pick and the nodes each
/// pick newly activated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreedyOutcome {
    pub picks: Vec<usize>,
    pub gains: Vec<usize>,
    pub objective: Vec<usize>,
    pub crossed: Vec<Vec<usize>>,
}

fn key_of(
    cache: &InfluenceCache<'_>,
    state: &ActivationState,
    node: usize,
    quality: f64,
) -> Result<Key> {
    let col = cache.column(node)?;
    Ok(Key {
        gain: marginal_gain(state, col, quality),
        mass: col.mass(),
        node,
    })
}

fn commit(
    cache: &InfluenceCache<'_>,
    state: &mut ActivationState,
    out: &mut GreedyOutcome,
    key: Key,
    quality: f64,
) -> Result<()> {
    let crossed = state.add(cache.column(key.node)?, quality)?;
    out.picks.push(key.node);
    out.gains.push(key.gain);
    out.objective.push(state.activated_count());
    out.crossed.push(crossed);
    Ok(())
}

/// Greedily adds up to `b` candidates to `state`, each scored with the same
/// `quality`. When every gain is zero the ranking falls through to raw
/// influence mass.
pub fn greedy_batch(
    cache: &InfluenceCache<'_>,
    state: &mut ActivationState,
    candidates: &[usize],
    b: usize,
    quality: f64,
    lazy: bool,
) -> Result<GreedyOutcome> {
    let b = b.min(candidates.len());
    let mut out = GreedyOutcome::default();
    if b == 0 {
        return Ok(out);
    }
    if lazy {
        let initial: Vec<Key> = candidates
            .par_iter()
            .map(|&v| key_of(cache, state, v, quality))
            .collect::<Result<_>>()?;
        let mut heap: BinaryHeap<Stale> = initial
            .into_iter()
            .map(|key| Stale { key, round: 0 })
            .collect();
        let mut round = 0;
        while out.picks.len() < b {
            let top = heap.pop().expect("b <= candidates");
            if top.round == round {
                commit(cache, state, &mut out, top.key, quality)?;
                round += 1;
            } else {
                let key = key_of(cache, state, top.key.node, quality)?;
                heap.push(Stale { key, round });
            }
        }
    } else {
        let mut remaining = candidates.to_vec();
        while out.picks.len() < b {
            let best = remaining
                .par_iter()
                .map(|&v| key_of(cache, state, v, quality))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .max()
                .expect("non-empty");
            remaining.retain(|&v| v != best.node);
            commit(cache, state, &mut out, best, quality)?;
        }
    }
    Ok(out)
}

/// One batch of reliable influence maximization. Already labeled nodes
/// contribute with their stored quality (or 1 when reliable selection is off);
/// every candidate is scored at quality `alpha` (or 1).
pub fn select_batch(
    cache: &InfluenceCache<'_>,
    labeled: &LabeledSet,
    config: &SelectorConfig,
    candidates: &[usize],
    num_classes: usize,
) -> Result<Vec<usize>> {
    let remaining = config.budget.saturating_sub(labeled.len());
    let b = config.effective_batch_size(num_classes).min(remaining);
    let rs = config.reliable_selection;
    let mut state = build_activation_cached(cache, labeled, config.theta, |e| {
        if rs {
            e.quality
        } else {
            1.0
        }
    })?;
    let quality = if rs { labeled.alpha() } else { 1.0 };
    Ok(greedy_batch(cache, &mut state, candidates, b, quality, true)?.picks)
}
