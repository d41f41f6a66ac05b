//! Plain-text dataset formats.
//!
//! * edges: one `u v` pair per line, whitespace separated, `#` comments.
//! * labels: one integer per line, line `i` is node `i`.
//! * features: dense CSV rows, or sparse `idx:value` tokens per row.
//! * splits: JSON `{"train": [...], "val": [...], "test": [...]}`.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{Graph, Splits};
use crate::error::{Result, RimError};

/// File locations for one dataset.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub features: Option<PathBuf>,
    pub labels: PathBuf,
    pub splits: PathBuf,
}

impl DatasetPaths {
    /// Conventional layout inside a directory: `edges.txt`, `labels.txt`,
    /// `splits.json` and an optional `features.csv` or `features.txt`.
    pub fn in_dir(dir: &Path) -> Self {
        let features = ["features.csv", "features.txt"]
            .iter()
            .map(|f| dir.join(f))
            .find(|p| p.exists());
        DatasetPaths {
            edges: dir.join("edges.txt"),
            features,
            labels: dir.join("labels.txt"),
            splits: dir.join("splits.json"),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| RimError::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_edges(text: &str, file: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (line, content) in data_lines(text) {
        let mut it = content.split_whitespace();
        let mut next = |what: &str| -> Result<usize> {
            let tok = it.next().ok_or_else(|| RimError::Parse {
                file: file.to_string(),
                line,
                msg: format!("missing {what} endpoint"),
            })?;
            tok.parse::<usize>().map_err(|e| RimError::Parse {
                file: file.to_string(),
                line,
                msg: format!("bad node id {tok:?}: {e}"),
            })
        };
        let u = next("first")?;
        let v = next("second")?;
        if it.next().is_some() {
            return Err(RimError::Parse {
                file: file.to_string(),
                line,
                msg: "expected exactly two node ids".into(),
            });
        }
        if u == v {
            return Err(RimError::SelfLoop {
                file: file.to_string(),
                line,
                node: u,
            });
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_labels(text: &str, file: &str) -> Result<Vec<usize>> {
    data_lines(text)
        .map(|(line, content)| {
            content.parse::<usize>().map_err(|e| RimError::Parse {
                file: file.to_string(),
                line,
                msg: format!("bad label {content:?}: {e}"),
            })
        })
        .collect()
}

/// Parses a features file, auto-detecting sparse `idx:value` rows by the
/// presence of `:` anywhere in the file.
pub fn read_features(path: &Path, n: usize) -> Result<Array2<f64>> {
    let text = read(path)?;
    parse_features(&text, &display(path), n)
}

fn parse_features(text: &str, file: &str, n: usize) -> Result<Array2<f64>> {
    let perr = |line: usize, msg: String| RimError::Parse {
        file: file.to_string(),
        line,
        msg,
    };
    let sparse = text.contains(':');
    // sparse rows may be blank (all-zero row), so only comments are skipped there
    let rows: Vec<(usize, &str)> = if sparse {
        let mut rows: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.starts_with('#'))
            .collect();
        while rows.last().is_some_and(|(_, l)| l.is_empty()) {
            rows.pop();
        }
        rows
    } else {
        data_lines(text).collect()
    };
    if rows.len() != n {
        return Err(RimError::Dimension {
            expected: n,
            got: rows.len(),
        });
    }
    if sparse {
        let mut entries = Vec::with_capacity(n);
        let mut dim = 0usize;
        for &(line, content) in &rows {
            let mut row = Vec::new();
            for tok in content.split_whitespace() {
                let (idx, val) = tok
                    .split_once(':')
                    .ok_or_else(|| perr(line, format!("expected idx:value, got {tok:?}")))?;
                let idx: usize = idx
                    .parse()
                    .map_err(|e| perr(line, format!("bad index {idx:?}: {e}")))?;
                let val: f64 = val
                    .parse()
                    .map_err(|e| perr(line, format!("bad value {val:?}: {e}")))?;
                dim = dim.max(idx + 1);
                row.push((idx, val));
            }
            entries.push(row);
        }
        let mut x = Array2::zeros((n, dim));
        for (i, row) in entries.into_iter().enumerate() {
            for (j, v) in row {
                x[[i, j]] = v;
            }
        }
        Ok(x)
    } else {
        let mut dim = None;
        let mut data = Vec::new();
        for &(line, content) in &rows {
            let before = data.len();
            for tok in content.split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                let v: f64 = tok
                    .parse()
                    .map_err(|e| perr(line, format!("bad value {tok:?}: {e}")))?;
                data.push(v);
            }
            let width = data.len() - before;
            match dim {
                None => dim = Some(width),
                Some(d) if d != width => {
                    return Err(perr(line, format!("row has {width} columns, expected {d}")))
                }
                _ => {}
            }
        }
        let d = dim.unwrap_or(0);
        Array2::from_shape_vec((n, d), data).map_err(|e| perr(0, e.to_string()))
    }
}

/// Loads a dataset. Node count is the number of label lines; the class count
/// is inferred as `max label + 1`.
pub fn load_dataset(paths: &DatasetPaths) -> Result<Graph> {
    let labels_file = display(&paths.labels);
    let labels = parse_labels(&read(&paths.labels)?, &labels_file)?;
    let n = labels.len();
    let num_classes = labels.iter().max().map_or(0, |m| m + 1);

    let edges_file = display(&paths.edges);
    let edges = parse_edges(&read(&paths.edges)?, &edges_file)?;

    let mut graph = Graph::from_edges(n, &edges)?.with_labels(labels, num_classes)?;

    if let Some(fp) = &paths.features {
        graph = graph.with_features(read_features(fp, n)?)?;
    }

    let splits: Splits = serde_json::from_str(&read(&paths.splits)?)?;
    graph.with_splits(splits)
}

pub fn load_dataset_dir(dir: &Path) -> Result<Graph> {
    load_dataset(&DatasetPaths::in_dir(dir))
}

/// Writes `graph` in the directory layout read by [`load_dataset_dir`], with
/// dense CSV features.
pub fn write_dataset_dir(graph: &Graph, dir: &Path) -> Result<()> {
    use std::fmt::Write as _;

    fs::create_dir_all(dir).map_err(|e| RimError::io(dir, e))?;
    let write = |name: &str, body: String| {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| RimError::io(&path, e))
    };
    let mut edges = String::new();
    for (u, v) in graph.edges() {
        writeln!(edges, "{u} {v}").expect("string write");
    }
    write("edges.txt", edges)?;
    let mut labels = String::new();
    for y in graph.labels() {
        writeln!(labels, "{y}").expect("string write");
    }
    write("labels.txt", labels)?;
    write("splits.json", serde_json::to_string(graph.splits())?)?;
    if let Some(x) = graph.features() {
        let mut body = String::new();
        for row in x.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(body, "{}", cells.join(",")).expect("string write");
        }
        write("features.csv", body)?;
    }
    Ok(())
}
