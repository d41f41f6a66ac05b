use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use rim::graph::{load_dataset_dir, write_dataset_dir, PropagationOperator};
use rim::harness::{
    generate_sbm, run_experiment, train_and_evaluate, write_report, ExperimentConfig, RunArtifact,
    SbmParams,
};
use rim::influence::influence_column;
use rim::models::{ModelKind, SgcHyper};
use rim::oracle::NoisyOracle;
use rim::selection::{run_al_loop, SelectorConfig};
use rim::{Result, RimError};

#[derive(Parser)]
#[command(name = "rim", version, about = "Reliable influence maximization for graph active learning")]
struct Cli {
    /// Overrides the seed of the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write results.csv, summary.json and traces.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one active-learning selection and write its trace.
    Select {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Oracle labeling accuracy.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Train a model on the labels of a selection trace and report accuracy.
    Train {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        labeled: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// JSON file with learning_rate / epochs / weight_decay for sgc.
        #[arg(long)]
        sgc: Option<PathBuf>,
    },
    /// Dump the k-step influence column of one source node as CSV.
    Influence {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        source: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a stochastic block model and write it as a dataset directory.
    Generate {
        /// JSON file with the SBM parameters.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| RimError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| RimError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| RimError::Validation(e.to_string()))?;
    }
    match cli.command {
        Command::Experiment { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let report = run_experiment(&cfg)?;
            write_report(&cfg, &report, &out)?;
            for c in &report.summary.cells {
                println!(
                    "{:<10} alpha={:<4} budget={:<4} acc={:.4} ± {:.4} (runs {}, failed {})",
                    c.method, c.alpha, c.budget, c.mean_accuracy, c.std_accuracy, c.runs, c.failures
                );
            }
        }
        Command::Select {
            dataset,
            config,
            out,
            alpha,
        } => {
            let graph = load_dataset_dir(&dataset)?;
            let mut cfg: SelectorConfig = read_json(&config)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let mut oracle = NoisyOracle::new(alpha, graph.num_classes(), graph.labels(), cfg.seed)?;
            let run = run_al_loop(&graph, &cfg, &mut oracle)?;
            let artifact = RunArtifact {
                config: cfg,
                alpha,
                labeled: run.labeled,
                trace: run.trace,
            };
            write_file(&out, &serde_json::to_string_pretty(&artifact)?)?;
        }
        Command::Train {
            model,
            labeled,
            dataset,
            out,
            sgc,
        } => {
            let graph = load_dataset_dir(&dataset)?;
            let artifact: RunArtifact = read_json(&labeled)?;
            let hyper: SgcHyper = match sgc {
                Some(p) => read_json(&p)?,
                None => SgcHyper::default(),
            };
            let cfg = &artifact.config;
            let res = train_and_evaluate(
                &graph,
                &artifact.labeled,
                model,
                cfg.k,
                cfg.lp_iters,
                hyper,
                cfg.reliable_training,
            )?;
            let metrics = json!({
                "model": model,
                "labeled": artifact.labeled.len(),
                "reliable_training": cfg.reliable_training,
                "test_accuracy": res.test_accuracy,
                "val_accuracy": res.val_accuracy,
                "unreached": res.unreached,
            });
            write_file(&out, &serde_json::to_string_pretty(&metrics)?)?;
        }
        Command::Influence {
            dataset,
            source,
            k,
            out,
        } => {
            let graph = load_dataset_dir(&dataset)?;
            let op = PropagationOperator::new(&graph, k);
            let col = influence_column(&op, source)?;
            let mut body = String::from("node,score\n");
            for (j, s) in col.to_dense().iter().enumerate() {
                body.push_str(&format!("{j},{s}\n"));
            }
            match out {
                Some(p) => write_file(&p, &body)?,
                None => std::io::stdout()
                    .write_all(body.as_bytes())
                    .map_err(|e| RimError::Io {
                        path: "<stdout>".into(),
                        source: e,
                    })?,
            }
        }
        Command::Generate { config, out } => {
            let params: SbmParams = read_json(&config)?;
            let graph = generate_sbm(&params, cli.seed.unwrap_or(0))?;
            write_dataset_dir(&graph, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
