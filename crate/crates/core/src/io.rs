//! Bundle directory format.
//!
//! ```text
//! meta.json       {"num_nodes", "feature_dim", "num_classes", "name"}
//! edges.tsv       "u<TAB>v" per line, u < v
//! features.csv    one comma-separated row per node, shortest round-trip decimals
//! labels.csv      one class id per line
//! masks.json      {"train": [...], "val": [...], "test": [...]}   (optional)
//! subgroups.json  [tag, ...]                                      (optional)
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphBundle, Masks};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub num_nodes: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
    #[serde(default)]
    pub name: String,
}

fn read_required(dir: &Path, file: &str) -> Result<String> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(Error::MissingFile(path));
    }
    fs::read_to_string(&path).map_err(|e| Error::io(path, e))
}

fn read_optional(dir: &Path, file: &str) -> Result<Option<String>> {
    let path = dir.join(file);
    if !path.is_file() {
        return Ok(None);
    }
    fs::read_to_string(&path)
        .map(Some)
        .map_err(|e| Error::io(path, e))
}

fn malformed(file: &str, line: usize, reason: impl Into<String>) -> Error {
    Error::Malformed {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_edges(text: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (line, row) in data_lines(text) {
        let mut parts = row.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(malformed("edges.tsv", line, "expected two node ids"));
        };
        let u: usize = a
            .parse()
            .map_err(|_| malformed("edges.tsv", line, format!("bad node id `{a}`")))?;
        let v: usize = b
            .parse()
            .map_err(|_| malformed("edges.tsv", line, format!("bad node id `{b}`")))?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        for x in [u, v] {
            if x >= n {
                return Err(Error::OutOfRange {
                    what: "edge endpoint",
                    index: x,
                    bound: n,
                });
            }
        }
        if u > v {
            return Err(malformed("edges.tsv", line, format!("edge {u} {v} is not canonical (u < v)")));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn parse_features(text: &str, n: usize, d: usize) -> Result<Matrix> {
    let mut data = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (line, row) in data_lines(text) {
        let before = data.len();
        for cell in row.split(',') {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| malformed("features.csv", line, format!("bad number `{cell}`")))?;
            if !v.is_finite() {
                return Err(malformed("features.csv", line, "non-finite value"));
            }
            data.push(v);
        }
        if data.len() - before != d {
            return Err(malformed(
                "features.csv",
                line,
                format!("{} columns, expected {d}", data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(malformed("features.csv", rows, format!("{rows} rows, expected {n}")));
    }
    Matrix::from_vec(n, d, data)
}

fn parse_labels(text: &str, n: usize, k: usize) -> Result<Vec<usize>> {
    let mut labels = Vec::with_capacity(n);
    for (line, row) in data_lines(text) {
        let y: usize = row
            .parse()
            .map_err(|_| malformed("labels.csv", line, format!("bad label `{row}`")))?;
        if y >= k {
            return Err(Error::OutOfRange {
                what: "label",
                index: y,
                bound: k,
            });
        }
        labels.push(y);
    }
    if labels.len() != n {
        return Err(malformed(
            "labels.csv",
            labels.len(),
            format!("{} labels, expected {n}", labels.len()),
        ));
    }
    Ok(labels)
}

/// Read and validate a bundle directory.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<GraphBundle> {
    let dir = dir.as_ref();
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let meta: BundleMeta = serde_json::from_str(&read_required(dir, "meta.json")?)?;
    let n = meta.num_nodes;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let edges = parse_edges(&read_required(dir, "edges.tsv")?, n)?;
    let features = parse_features(&read_required(dir, "features.csv")?, n, meta.feature_dim)?;
    let labels = parse_labels(&read_required(dir, "labels.csv")?, n, meta.num_classes)?;
    let mut g = GraphBundle::new(meta.name, meta.num_classes, edges, features, labels)?;
    if let Some(text) = read_optional(dir, "masks.json")? {
        let masks: Masks = serde_json::from_str(&text)?;
        g = g.with_masks(masks)?;
    }
    if let Some(text) = read_optional(dir, "subgroups.json")? {
        let tags: Vec<u32> = serde_json::from_str(&text)?;
        g = g.with_subgroups(tags)?;
    }
    Ok(g)
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<()> {
    let path = dir.join(file);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Write a bundle directory, creating it if needed. Optional files that the
/// bundle does not carry are removed so the directory mirrors `g` exactly.
pub fn save_bundle(g: &GraphBundle, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    if g.num_nodes() == 0 {
        return Err(Error::EmptyGraph);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = BundleMeta {
        num_nodes: g.num_nodes(),
        feature_dim: g.feature_dim(),
        num_classes: g.num_classes(),
        name: g.name().to_string(),
    };
    write(dir, "meta.json", &serde_json::to_string_pretty(&meta)?)?;

    let mut edges = String::with_capacity(g.num_edges() * 12);
    for &(u, v) in g.edges() {
        edges.push_str(&format!("{u}\t{v}\n"));
    }
    write(dir, "edges.tsv", &edges)?;
    write(dir, "features.csv", &features_to_csv(g.features()))?;

    let mut labels = String::with_capacity(g.num_nodes() * 2);
    for y in g.labels() {
        labels.push_str(&format!("{y}\n"));
    }
    write(dir, "labels.csv", &labels)?;

    sync_optional(dir, "masks.json", g.masks().map(serde_json::to_string).transpose()?)?;
    sync_optional(
        dir,
        "subgroups.json",
        g.subgroups().map(serde_json::to_string).transpose()?,
    )?;
    Ok(())
}

fn sync_optional(dir: &Path, file: &str, contents: Option<String>) -> Result<()> {
    match contents {
        Some(text) => write(dir, file, &text),
        None => {
            let path = dir.join(file);
            if path.exists() {
                fs::remove_file(&path).map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        }
    }
}

/// Rows as comma-separated shortest round-trip decimals, no header.
pub fn features_to_csv(m: &Matrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 20);
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parse a headerless numeric CSV into a matrix (used for sample files).
pub fn matrix_from_csv(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for (line, row) in data_lines(text) {
        let vals = row
            .split(',')
            .map(|c| {
                c.trim()
                    .parse::<f64>()
                    .map_err(|_| malformed("matrix csv", line, format!("bad number `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    Matrix::from_rows(&rows)
}
