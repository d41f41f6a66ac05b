use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rim")).args(args).current_dir(cwd).output().unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn generate(dir: &Path) {
    fs::write(
        dir.join("sbm.json"),
        r#"{"blocks": 3, "nodes_per_block": 30, "p_intra": 0.2, "p_inter": 0.01,
            "feature_dim": 3, "feature_noise": 0.8}"#,
    )
    .unwrap();
    ok(&rim(&["--seed", "3", "generate", "--config", "sbm.json", "--out", "data"], dir));
}

#[test]
fn generate_select_train_influence() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    generate(dir);
    for f in ["edges.txt", "labels.txt", "splits.json", "features.csv"] {
        assert!(dir.join("data").join(f).exists(), "{f}");
    }

    fs::write(dir.join("sel.json"), r#"{"budget": 9, "mode": "feature", "strategy": "rim", "theta": 0.03}"#).unwrap();
    ok(&rim(&["select", "--dataset", "data", "--config", "sel.json", "--alpha", "0.8", "--out", "trace.json"], dir));
    let trace: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("trace.json")).unwrap()).unwrap();
    assert_eq!(trace["alpha"], 0.8);
    assert_eq!(trace["trace"]["batches"].as_array().unwrap().len(), 3);

    for model in ["lp", "sgc"] {
        let out = format!("{model}.json");
        ok(&rim(&["train", "--model", model, "--labeled", "trace.json", "--dataset", "data", "--out", &out], dir));
        let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.join(&out)).unwrap()).unwrap();
        let acc = m["test_accuracy"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&acc));
        assert_eq!(m["labeled"], 9);
    }

    ok(&rim(&["influence", "--dataset", "data", "--source", "4", "--out", "col.csv"], dir));
    let text = fs::read_to_string(dir.join("col.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,score"));
    let total: f64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert!(total > 0.0);
    assert_eq!(text.lines().count(), 91);
}

#[test]
fn experiment_writes_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    generate(dir);
    fs::write(
        dir.join("exp.json"),
        r#"{"dataset": {"path": "data"}, "model": "lp", "methods": ["rim", "random", "lp_mre"],
            "alphas": [0.8], "budgets": [6], "repetitions": 2, "record_timing": true}"#,
    )
    .unwrap();
    ok(&rim(&["experiment", "--config", "exp.json", "--out", "out"], dir));
    let csv = fs::read_to_string(dir.join("out/results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("method,alpha,budget,rep,accuracy,correct_act,incorrect_act,inactive,seconds")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| !r.ends_with(',')));
    assert!(dir.join("out/summary.json").exists());
    assert!(dir.join("out/timings.csv").exists());
    assert_eq!(fs::read_dir(dir.join("out/traces")).unwrap().count(), 6);
}

#[test]
fn strict_configs_and_bad_input_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    generate(dir);
    fs::write(dir.join("sel.json"), r#"{"budget": 3, "mode": "feature", "strategy": "rim", "tehta": 0.1}"#).unwrap();
    let out = rim(&["select", "--dataset", "data", "--config", "sel.json", "--out", "t.json"], dir);
    assert!(!out.status.success());
    assert!(!dir.join("t.json").exists());

    let out = rim(&["influence", "--dataset", "data", "--source", "9999"], dir);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    let out = rim(&["train", "--model", "gcn", "--labeled", "x", "--dataset", "data", "--out", "m.json"], dir);
    assert!(!out.status.success());
}
