//! Non-influence selectors used for comparison.

use ndarray::Array2;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;

use super::Strategy;
use crate::error::{Result, RimError};
use crate::graph::PropagationOperator;
use crate::models::{argmax, lp_fit_predict, row_entropy};
use crate::reliability::{LabeledEntry, LabeledSet};

/// Inputs shared by the baseline strategies.
pub struct BaselineContext<'a, 'g> {
    pub op: &'a PropagationOperator<'g>,
    pub labeled: &'a LabeledSet,
    /// Current LP soft labels; required by `lp_me` and `lp_mre`.
    pub lp_soft: Option<&'a Array2<f64>>,
    pub num_classes: usize,
    pub lp_iters: usize,
    pub use_reliability: bool,
    pub mre_max_candidates: usize,
}

fn total_entropy(soft: &Array2<f64>) -> f64 {
    soft.rows().into_iter().map(row_entropy).sum()
}

/// Shuffles for a seeded tie-break, then keeps the `b` highest scores.
fn top_b<R: Rng + ?Sized>(mut scored: Vec<(usize, f64)>, b: usize, rng: &mut R) -> Vec<usize> {
    scored.shuffle(rng);
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.into_iter().take(b).map(|(v, _)| v).collect()
}

pub fn baseline_select<R: Rng + ?Sized>(
    strategy: Strategy,
    ctx: &BaselineContext<'_, '_>,
    candidates: &[usize],
    b: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let b = b.min(candidates.len());
    match strategy {
        Strategy::Rim => Err(RimError::validation(
            "rim is not a baseline strategy; use select_batch",
        )),
        Strategy::Random => Ok(index::sample(rng, candidates.len(), b)
            .into_iter()
            .map(|i| candidates[i])
            .collect()),
        Strategy::Degree => {
            let g = ctx.op.graph();
            let mut ranked = candidates.to_vec();
            ranked.sort_by(|&a, &c| g.degree(c).cmp(&g.degree(a)).then(a.cmp(&c)));
            ranked.truncate(b);
            Ok(ranked)
        }
        Strategy::LpMe => {
            let soft = ctx
                .lp_soft
                .ok_or_else(|| RimError::validation("lp_me needs label-propagation soft labels"))?;
            let scored = candidates
                .iter()
                .map(|&v| (v, row_entropy(soft.row(v))))
                .collect();
            Ok(top_b(scored, b, rng))
        }
        Strategy::LpMre => {
            let soft = ctx
                .lp_soft
                .ok_or_else(|| RimError::validation("lp_mre needs label-propagation soft labels"))?;
            let pool: Vec<usize> = if candidates.len() > ctx.mre_max_candidates {
                let mut idx = index::sample(rng, candidates.len(), ctx.mre_max_candidates).into_vec();
                idx.sort_unstable();
                idx.into_iter().map(|i| candidates[i]).collect()
            } else {
                candidates.to_vec()
            };
            let before = total_entropy(soft);
            let scored = pool
                .par_iter()
                .map(|&v| {
                    let reduction = before - entropy_if_labeled(ctx, soft, v)?;
                    Ok((v, reduction))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(top_b(scored, b.min(pool.len()), rng))
        }
    }
}

/// Total LP entropy after labeling `v` with its current most likely class.
pub(crate) fn entropy_if_labeled(
    ctx: &BaselineContext<'_, '_>,
    soft: &Array2<f64>,
    v: usize,
) -> Result<f64> {
    let mut hypothetical = ctx.labeled.clone();
    let batch = ctx.labeled.entries().last().map_or(0, |e| e.batch);
    hypothetical.push(LabeledEntry {
        node: v,
        label: argmax(soft.row(v)),
        quality: if ctx.use_reliability {
            ctx.labeled.alpha()
        } else {
            1.0
        },
        batch,
    })?;
    let out = lp_fit_predict(
        ctx.op,
        &hypothetical,
        ctx.num_classes,
        ctx.lp_iters,
        ctx.use_reliability,
    )?;
    Ok(total_entropy(&out.soft))
}
