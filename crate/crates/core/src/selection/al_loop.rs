use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    baseline_select, greedy_batch, BaselineContext, BatchRecord, GreedyOutcome, SelectionTrace,
    SelectorConfig, Strategy,
};
use crate::error::Result;
use crate::graph::{Graph, PropagationOperator};
use crate::influence::{build_activation_cached, marginal_gain, InfluenceCache};
use crate::models::lp_fit_predict;
use crate::oracle::NoisyOracle;
use crate::reliability::{update_quality, LabeledEntry, LabeledSet, SimilarityMode, SimilaritySource};

/// Stream offset separating baseline randomness from the oracle stream.
const SELECTOR_STREAM: u64 = 0x5eed_5e1e_c7ed_0001;

/// Outcome of one active-learning run.
#[derive(Debug, Clone)]
pub struct AlRun {
    pub labeled: LabeledSet,
    pub trace: SelectionTrace,
}

/// Runs batched selection until the budget is spent: select a batch, query
/// the oracle for each pick, then refresh the batch's qualities by weighted
/// voting against earlier batches.
pub fn run_al_loop(
    graph: &Graph,
    config: &SelectorConfig,
    oracle: &mut NoisyOracle<'_>,
) -> Result<AlRun> {
    let n = graph.num_nodes();
    let c = graph.num_classes();
    let mut train = graph.splits().train.clone();
    train.sort_unstable();
    config.validate(c, train.len())?;

    let op = PropagationOperator::new(graph, config.k);
    let cache = InfluenceCache::new(op.clone());
    let alpha = oracle.alpha();
    let rs = config.reliable_selection;
    let tracks = config.tracks_quality();
    let candidate_quality = if rs { alpha } else { 1.0 };
    let b = config.effective_batch_size(c);

    let feature_source = if tracks && config.mode == SimilarityMode::Feature {
        Some(SimilaritySource::new(
            SimilarityMode::Feature,
            op.smooth_features()?,
        ))
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SELECTOR_STREAM);
    let mut labeled = LabeledSet::new(alpha)?;
    let mut trace = SelectionTrace {
        batches: Vec::new(),
        first_activator: vec![None; n],
    };

    let mut batch = 0;
    while labeled.len() < config.budget {
        let want = b.min(config.budget - labeled.len());
        let candidates: Vec<usize> = train
            .iter()
            .copied()
            .filter(|&v| !labeled.contains(v))
            .collect();

        let mut state = build_activation_cached(&cache, &labeled, config.theta, |e| {
            if rs {
                e.quality
            } else {
                1.0
            }
        })?;
        for j in 0..n {
            if trace.first_activator[j].is_none() && state.is_activated(j) {
                trace.first_activator[j] = state.best_source(j);
            }
        }

        let outcome = match config.strategy {
            Strategy::Rim => {
                greedy_batch(&cache, &mut state, &candidates, want, candidate_quality, true)?
            }
            other => {
                let lp_soft = match other {
                    Strategy::LpMe | Strategy::LpMre if labeled.is_empty() => {
                        Some(Array2::zeros((n, c)))
                    }
                    Strategy::LpMe | Strategy::LpMre => Some(
                        lp_fit_predict(&op, &labeled, c, config.lp_iters, config.reliable_training)?
                            .soft,
                    ),
                    _ => None,
                };
                let ctx = BaselineContext {
                    op: &op,
                    labeled: &labeled,
                    lp_soft: lp_soft.as_ref(),
                    num_classes: c,
                    lp_iters: config.lp_iters,
                    use_reliability: config.reliable_training,
                    mre_max_candidates: config.mre_max_candidates,
                };
                let picks = baseline_select(other, &ctx, &candidates, want, &mut rng)?;
                let mut out = GreedyOutcome::default();
                for v in picks {
                    let col = cache.column(v)?;
                    out.gains.push(marginal_gain(&state, col, candidate_quality));
                    out.crossed.push(state.add(col, candidate_quality)?);
                    out.objective.push(state.activated_count());
                    out.picks.push(v);
                }
                out
            }
        };
        for (&pick, crossed) in outcome.picks.iter().zip(&outcome.crossed) {
            for &j in crossed {
                trace.first_activator[j].get_or_insert(pick);
            }
        }

        for &v in &outcome.picks {
            let label = oracle.query(v)?;
            labeled.push(LabeledEntry {
                node: v,
                label,
                quality: if tracks { alpha } else { 1.0 },
                batch,
            })?;
        }

        // first-batch nodes keep alpha: there is nothing earlier to vote with
        if tracks && batch > 0 {
            let label_source;
            let src = match &feature_source {
                Some(s) => s,
                None => {
                    let seeds = labeled.before_batch(batch)?;
                    let soft = lp_fit_predict(&op, &seeds, c, config.lp_iters, true)?.soft;
                    label_source = SimilaritySource::new(SimilarityMode::Label, soft);
                    &label_source
                }
            };
            update_quality(&mut labeled, &outcome.picks, src, c)?;
        }

        let qualities = outcome
            .picks
            .iter()
            .map(|&v| (v, labeled.get(v).map_or(0.0, |e| e.quality)))
            .collect();
        trace.batches.push(BatchRecord {
            index: batch,
            activated: state.activated_count(),
            picks: outcome.picks,
            gains: outcome.gains,
            objective: outcome.objective,
            qualities,
        });
        batch += 1;
    }
    Ok(AlRun { labeled, trace })
}
