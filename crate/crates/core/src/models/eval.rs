//! Accuracy by mask, homophily range and disparity bin, and margin losses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{train, LinearStack, TrainConfig};
use crate::error::Result;
use crate::graph::GraphBundle;
use crate::homophily::node_homophily;
use crate::matrix::Matrix;
use crate::metrics::disparity::{disparity_scores, partition_bins, BinSummary};

/// Homophily range edges; ranges are `[lo, hi)` except the closed last one.
pub const HOMOPHILY_EDGES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub correct: usize,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub gamma: f64,
    /// Number of disparity bins; 0 skips disparity binning.
    pub disparity_bins: usize,
    pub disparity_hop: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            gamma: 0.0,
            disparity_bins: 5,
            disparity_hop: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Accuracy over the test mask, or all nodes without one.
    pub accuracy: f64,
    pub evaluated: usize,
    pub mask_accuracy: BTreeMap<String, f64>,
    /// Ranges of 1-hop node homophily over the evaluated nodes.
    pub homophily_bins: Vec<HomophilyBin>,
    /// Evaluated nodes without neighbors.
    pub undefined_homophily: HomophilyBin,
    /// Present when a train mask exists and there are enough evaluated nodes.
    pub disparity_bins: Option<Vec<BinSummary>>,
    pub gamma: f64,
    pub margin_loss: f64,
    pub train_margin_loss: Option<f64>,
}

impl EvalReport {
    pub fn bin_accuracies(&self) -> Vec<Option<f64>> {
        self.homophily_bins.iter().map(|b| b.accuracy).collect()
    }

    pub fn disparity_accuracies(&self) -> Option<Vec<f64>> {
        self.disparity_bins
            .as_ref()
            .map(|bins| bins.iter().map(|b| b.accuracy.unwrap_or(f64::NAN)).collect())
    }
}

/// Share of `nodes` whose true-class logit does not beat every other logit
/// by more than `gamma`. Ties count as losses.
pub fn margin_loss(logits: &Matrix, labels: &[usize], nodes: &[usize], gamma: f64) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let losses = nodes
        .iter()
        .filter(|&&i| {
            let row = logits.row(i);
            let y = labels[i];
            let other = row
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != y)
                .map(|(_, &v)| v)
                .fold(f64::NEG_INFINITY, f64::max);
            row[y] <= gamma + other
        })
        .count();
    losses as f64 / nodes.len() as f64
}

fn homophily_bin_index(h: f64) -> usize {
    (1..HOMOPHILY_EDGES.len() - 1).rev().find(|&e| h >= HOMOPHILY_EDGES[e]).unwrap_or(0)
}

pub fn evaluate(model: &LinearStack, g: &GraphBundle, gamma: f64) -> Result<EvalReport> {
    evaluate_with(
        model,
        g,
        &EvalOptions {
            gamma,
            ..EvalOptions::default()
        },
    )
}

pub fn evaluate_with(model: &LinearStack, g: &GraphBundle, opts: &EvalOptions) -> Result<EvalReport> {
    let x = model.input_features(g);
    let logits = model.logits(&x);
    let pred: Vec<usize> = logits.row_iter().map(super::argmax).collect();
    let labels = g.labels();
    let correct = |i: usize| pred[i] == labels[i];
    let acc = |nodes: &[usize]| nodes.iter().filter(|&&i| correct(i)).count() as f64 / nodes.len() as f64;

    let nodes = g.eval_nodes();
    let mut mask_accuracy = BTreeMap::new();
    if let Some(m) = g.masks() {
        for (name, set) in [("train", &m.train), ("val", &m.val), ("test", &m.test)] {
            if !set.is_empty() {
                mask_accuracy.insert(name.to_string(), acc(set));
            }
        }
    }

    let h = node_homophily(g, 1)?;
    let mut homophily_bins: Vec<HomophilyBin> = HOMOPHILY_EDGES
        .windows(2)
        .map(|w| HomophilyBin {
            lo: w[0],
            hi: w[1],
            count: 0,
            correct: 0,
            accuracy: None,
        })
        .collect();
    let mut undefined = HomophilyBin {
        lo: f64::NAN,
        hi: f64::NAN,
        count: 0,
        correct: 0,
        accuracy: None,
    };
    for &i in &nodes {
        let bin = match h.per_node[i] {
            Some(v) => &mut homophily_bins[homophily_bin_index(v)],
            None => &mut undefined,
        };
        bin.count += 1;
        bin.correct += usize::from(correct(i));
    }
    for b in homophily_bins.iter_mut().chain(std::iter::once(&mut undefined)) {
        b.accuracy = (b.count > 0).then(|| b.correct as f64 / b.count as f64);
    }

    let disparity_bins = if opts.disparity_bins > 0 && g.train_nodes().is_ok() && nodes.len() >= opts.disparity_bins {
        let mut report = partition_bins(disparity_scores(g, opts.disparity_hop)?, opts.disparity_bins)?;
        report.record_predictions(&pred, labels);
        Some(report.bins)
    } else {
        None
    };

    Ok(EvalReport {
        accuracy: acc(&nodes),
        evaluated: nodes.len(),
        mask_accuracy,
        homophily_bins,
        undefined_homophily: undefined,
        disparity_bins,
        gamma: opts.gamma,
        margin_loss: margin_loss(&logits, labels, &nodes, opts.gamma),
        train_margin_loss: g.train_nodes().ok().map(|t| margin_loss(&logits, labels, t, opts.gamma)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub accuracy_a: Option<f64>,
    pub accuracy_b: Option<f64>,
    /// `accuracy_b − accuracy_a`; absent for empty ranges.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub accuracy_a: f64,
    pub accuracy_b: f64,
    pub bins: Vec<GapBin>,
}

impl CompareReport {
    pub fn gaps(&self) -> Vec<Option<f64>> {
        self.bins.iter().map(|b| b.gap).collect()
    }
}

/// Train both configurations on the same masks and report per-range
/// accuracy differences (positive when B is better).
pub fn compare(g: &GraphBundle, a: &TrainConfig, b: &TrainConfig) -> Result<CompareReport> {
    let opts = EvalOptions {
        disparity_bins: 0,
        ..EvalOptions::default()
    };
    let ra = evaluate_with(&train(g, a)?, g, &opts)?;
    let rb = evaluate_with(&train(g, b)?, g, &opts)?;
    let bins = ra
        .homophily_bins
        .iter()
        .zip(&rb.homophily_bins)
        .map(|(x, y)| GapBin {
            lo: x.lo,
            hi: x.hi,
            count: x.count,
            accuracy_a: x.accuracy,
            accuracy_b: y.accuracy,
            gap: x.accuracy.zip(y.accuracy).map(|(p, q)| q - p),
        })
        .collect();
    Ok(CompareReport {
        accuracy_a: ra.accuracy,
        accuracy_b: rb.accuracy,
        bins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_edges() {
        assert_eq!(homophily_bin_index(0.0), 0);
        assert_eq!(homophily_bin_index(0.2), 1);
        assert_eq!(homophily_bin_index(3.0 / 5.0), 3);
        assert_eq!(homophily_bin_index(0.7999), 3);
        assert_eq!(homophily_bin_index(1.0), 4);
    }

    #[test]
    fn margin_loss_limits() {
        let z = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let y = [0, 1];
        assert_eq!(margin_loss(&z, &y, &[0, 1], 1.0), 0.0);
        assert_eq!(margin_loss(&z, &y, &[0, 1], 2.0), 0.5);
        assert_eq!(margin_loss(&z, &y, &[0, 1], f64::INFINITY), 1.0);
        let tie = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert_eq!(margin_loss(&tie, &[0], &[0], 0.0), 1.0);
    }
}
