//! Grid runner: every (method, alpha, budget, repetition) cell is an
//! independent seeded active-learning run followed by training and test
//! evaluation. Results are sorted by cell before being written, so output is
//! independent of scheduling.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{activation_breakdown, generate_sbm, ActivationBreakdown, DatasetSpec, ExperimentConfig, MethodSpec};
use crate::error::{Result, RimError};
use crate::graph::{load_dataset_dir, Graph, PropagationOperator, Split};
use crate::models::{evaluate, lp_fit_predict, sgc_fit, sgc_predict, ModelKind, SgcHyper};
use crate::oracle::NoisyOracle;
use crate::reliability::{LabeledSet, SimilarityMode};
use crate::selection::{run_al_loop, SelectionTrace, SelectorConfig};

/// Serialized output of one selection run (`trace.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArtifact {
    pub config: SelectorConfig,
    pub alpha: f64,
    pub labeled: LabeledSet,
    pub trace: SelectionTrace,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub predictions: Vec<usize>,
    pub test_accuracy: Option<f64>,
    pub val_accuracy: Option<f64>,
    /// Nodes no label mass reached (LP only).
    pub unreached: usize,
}

/// Fits the downstream model on `labeled` and scores it on val/test.
pub fn train_and_evaluate(
    graph: &Graph,
    labeled: &LabeledSet,
    model: ModelKind,
    k: usize,
    lp_iters: usize,
    hyper: SgcHyper,
    use_reliability: bool,
) -> Result<TrainOutcome> {
    let c = graph.num_classes();
    let op = PropagationOperator::new(graph, k);
    let (predictions, unreached) = match model {
        ModelKind::Lp => {
            let out = lp_fit_predict(&op, labeled, c, lp_iters, use_reliability)?;
            let unreached = out.unreached.iter().filter(|&&u| u).count();
            (out.predictions, unreached)
        }
        ModelKind::Sgc => {
            let x = op.smooth_features()?;
            let m = sgc_fit(x.view(), labeled, c, hyper, use_reliability)?;
            (sgc_predict(&m, x.view())?.1, 0)
        }
    };
    let score = |s: Split| {
        if graph.splits().get(s).is_empty() {
            Ok(None)
        } else {
            evaluate(&predictions, graph, s).map(Some)
        }
    };
    Ok(TrainOutcome {
        test_accuracy: score(Split::Test)?,
        val_accuracy: score(Split::Val)?,
        predictions,
        unreached,
    })
}

/// One row of results.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: String,
    pub alpha: f64,
    pub budget: usize,
    pub rep: usize,
    pub outcome: std::result::Result<RunMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub breakdown: ActivationBreakdown,
    pub seconds: f64,
    pub artifact: RunArtifact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub method: String,
    pub alpha: f64,
    pub budget: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_correct_act: f64,
    pub mean_incorrect_act: f64,
    pub mean_inactive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunError {
    pub method: String,
    pub alpha: f64,
    pub budget: usize,
    pub rep: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    pub errors: Vec<RunError>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub results: Vec<RunResult>,
    pub summary: Summary,
}

impl ExperimentReport {
    pub fn cell(&self, method: &str, alpha: f64, budget: usize) -> Option<&CellSummary> {
        self.summary
            .cells
            .iter()
            .find(|c| c.method == method && c.alpha == alpha && c.budget == budget)
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of the synthetic graph used by repetition `rep`.
pub fn graph_seed(master: u64, rep: usize) -> u64 {
    splitmix(master ^ splitmix(rep as u64 ^ 0x6772_6170_6800))
}

struct Job<'a> {
    method: &'a MethodSpec,
    method_idx: usize,
    alpha_idx: usize,
    budget_idx: usize,
    rep: usize,
}

fn run_cell(config: &ExperimentConfig, graph: &Graph, job: &Job<'_>) -> Result<RunMetrics> {
    let alpha = config.alphas[job.alpha_idx];
    let budget = config.budgets[job.budget_idx];
    // methods of one (alpha, budget, rep) cell share their seed
    let cell_index = ((job.alpha_idx * config.budgets.len() + job.budget_idx) * config.repetitions
        + job.rep) as u64;
    let seed = config.seed ^ cell_index;
    let mode = match config.model {
        ModelKind::Lp => SimilarityMode::Label,
        ModelKind::Sgc => SimilarityMode::Feature,
    };
    let selector = SelectorConfig {
        budget,
        batch_size: config.batch_size,
        theta: config.theta,
        k: config.k,
        mode,
        reliable_selection: job.method.reliable_selection,
        reliable_training: job.method.reliable_training,
        strategy: job.method.strategy,
        seed,
        lp_iters: config.lp_iters,
        mre_max_candidates: config.mre_max_candidates,
    };
    let start = Instant::now();
    let mut oracle = NoisyOracle::new(alpha, graph.num_classes(), graph.labels(), seed)?;
    let run = run_al_loop(graph, &selector, &mut oracle)?;
    let trained = train_and_evaluate(
        graph,
        &run.labeled,
        config.model,
        config.k,
        config.lp_iters,
        config.sgc,
        job.method.reliable_training,
    )?;
    let accuracy = trained
        .test_accuracy
        .ok_or_else(|| RimError::validation("test split is empty"))?;
    let breakdown = activation_breakdown(&run.trace, &run.labeled, graph.labels())?;
    Ok(RunMetrics {
        accuracy,
        breakdown,
        seconds: start.elapsed().as_secs_f64(),
        artifact: RunArtifact {
            config: selector,
            alpha,
            labeled: run.labeled,
            trace: run.trace,
        },
    })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn summarize(config: &ExperimentConfig, results: &[RunResult]) -> Summary {
    let mut cells = Vec::new();
    let mut errors = Vec::new();
    for m in &config.methods {
        for &alpha in &config.alphas {
            for &budget in &config.budgets {
                let rows: Vec<&RunResult> = results
                    .iter()
                    .filter(|r| r.method == m.name && r.alpha == alpha && r.budget == budget)
                    .collect();
                let ok: Vec<&RunMetrics> =
                    rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
                let pick = |f: &dyn Fn(&RunMetrics) -> f64| ok.iter().map(|m| f(m)).collect::<Vec<_>>();
                let acc = pick(&|m| m.accuracy);
                cells.push(CellSummary {
                    method: m.name.clone(),
                    alpha,
                    budget,
                    runs: ok.len(),
                    failures: rows.len() - ok.len(),
                    mean_accuracy: mean(&acc),
                    std_accuracy: std_dev(&acc),
                    mean_correct_act: mean(&pick(&|m| m.breakdown.correct as f64)),
                    mean_incorrect_act: mean(&pick(&|m| m.breakdown.incorrect as f64)),
                    mean_inactive: mean(&pick(&|m| m.breakdown.inactive as f64)),
                });
                for r in rows {
                    if let Err(e) = &r.outcome {
                        errors.push(RunError {
                            method: r.method.clone(),
                            alpha,
                            budget,
                            rep: r.rep,
                            error: e.clone(),
                        });
                    }
                }
            }
        }
    }
    Summary { cells, errors }
}

fn load_graphs(config: &ExperimentConfig) -> Result<Vec<Graph>> {
    match &config.dataset {
        DatasetSpec::Path(dir) => Ok(vec![load_dataset_dir(dir)?]),
        DatasetSpec::Synthetic(params) => (0..config.repetitions)
            .into_par_iter()
            .map(|rep| generate_sbm(params, graph_seed(config.seed, rep)))
            .collect(),
    }
}

/// Runs the whole grid. A failing cell is recorded and does not stop the
/// others.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let graphs = load_graphs(config)?;
    let mut jobs = Vec::new();
    for (method_idx, method) in config.methods.iter().enumerate() {
        for alpha_idx in 0..config.alphas.len() {
            for budget_idx in 0..config.budgets.len() {
                for rep in 0..config.repetitions {
                    jobs.push(Job {
                        method,
                        method_idx,
                        alpha_idx,
                        budget_idx,
                        rep,
                    });
                }
            }
        }
    }
    let mut keyed: Vec<((usize, usize, usize, usize), RunResult)> = jobs
        .par_iter()
        .map(|job| {
            let graph = &graphs[job.rep.min(graphs.len() - 1)];
            let outcome = run_cell(config, graph, job).map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                log::warn!("{} alpha={} rep={}: {e}", job.method.name, config.alphas[job.alpha_idx], job.rep);
            }
            let key = (job.method_idx, job.alpha_idx, job.budget_idx, job.rep);
            let row = RunResult {
                method: job.method.name.clone(),
                alpha: config.alphas[job.alpha_idx],
                budget: config.budgets[job.budget_idx],
                rep: job.rep,
                outcome,
            };
            (key, row)
        })
        .collect();
    keyed.sort_by_key(|(k, _)| *k);
    let results: Vec<RunResult> = keyed.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(config, &results);
    Ok(ExperimentReport { results, summary })
}

pub const RESULTS_HEADER: [&str; 9] = [
    "method",
    "alpha",
    "budget",
    "rep",
    "accuracy",
    "correct_act",
    "incorrect_act",
    "inactive",
    "seconds",
];

/// Writes results.csv, timings.csv, summary.json and (optionally) one trace
/// per run into `dir`.
pub fn write_report(config: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| RimError::io(dir, e))?;

    let mut results = csv::Writer::from_path(dir.join("results.csv"))?;
    let mut timings = csv::Writer::from_path(dir.join("timings.csv"))?;
    results.write_record(RESULTS_HEADER)?;
    timings.write_record(["method", "alpha", "budget", "rep", "seconds"])?;
    for r in &report.results {
        let key = [
            r.method.clone(),
            r.alpha.to_string(),
            r.budget.to_string(),
            r.rep.to_string(),
        ];
        match &r.outcome {
            Ok(m) => {
                let seconds = m.seconds.to_string();
                let mut rec = key.to_vec();
                rec.extend([
                    m.accuracy.to_string(),
                    m.breakdown.correct.to_string(),
                    m.breakdown.incorrect.to_string(),
                    m.breakdown.inactive.to_string(),
                    if config.record_timing { seconds.clone() } else { String::new() },
                ]);
                results.write_record(&rec)?;
                let mut t = key.to_vec();
                t.push(seconds);
                timings.write_record(&t)?;
            }
            Err(_) => {
                let mut rec = key.to_vec();
                rec.extend(["ERROR".to_string(), String::new(), String::new(), String::new(), String::new()]);
                results.write_record(&rec)?;
            }
        }
    }
    results.flush().map_err(|e| RimError::io(dir.join("results.csv"), e))?;
    timings.flush().map_err(|e| RimError::io(dir.join("timings.csv"), e))?;

    let summary_path = dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&report.summary)?)
        .map_err(|e| RimError::io(&summary_path, e))?;

    if config.write_traces {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces).map_err(|e| RimError::io(&traces, e))?;
        for r in &report.results {
            if let Ok(m) = &r.outcome {
                let path = traces.join(format!(
                    "{}_a{}_b{}_r{}.json",
                    r.method, r.alpha, r.budget, r.rep
                ));
                fs::write(&path, serde_json::to_string(&m.artifact)?)
                    .map_err(|e| RimError::io(&path, e))?;
            }
        }
    }
    Ok(())
}
