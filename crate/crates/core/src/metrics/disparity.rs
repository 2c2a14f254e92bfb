//! Per-node disparity scores and equal-size score bins.
//!
//! For each test node `u` the nearest training node `v` is found under L2 on
//! k-hop self-loop aggregated features, and
//! `s_u = ‖F_u − F_v‖ + |h_u − h_v|` with k-hop homophily ratios. When
//! either ratio is undefined the homophily term is taken as 0 and counted
//! in [`DisparityReport::undefined_pairs`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nearest;
use crate::aggregate::{aggregate, AggregationMode};
use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::homophily::node_homophily;

/// Which quantity orders the bins.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreVariant {
    /// Distance plus homophily difference.
    #[default]
    Combined,
    Distance,
    Homophily,
}

impl std::str::FromStr for ScoreVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combined" | "score" => Ok(ScoreVariant::Combined),
            "distance" | "feature" => Ok(ScoreVariant::Distance),
            "homophily" | "homgap" => Ok(ScoreVariant::Homophily),
            other => Err(Error::invalid(format!("unknown score variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityEntry {
    pub node: usize,
    pub nearest: usize,
    pub distance: f64,
    pub hom_gap: f64,
    pub score: f64,
    /// 1-based bin id once [`partition_bins`] has run.
    pub bin: Option<usize>,
}

impl DisparityEntry {
    pub fn value(&self, variant: ScoreVariant) -> f64 {
        match variant {
            ScoreVariant::Combined => self.score,
            ScoreVariant::Distance => self.distance,
            ScoreVariant::Homophily => self.hom_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinSummary {
    pub bin: usize,
    pub count: usize,
    pub mean_score: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityReport {
    pub hop: usize,
    pub variant: ScoreVariant,
    /// One entry per test node, ascending by node id.
    pub entries: Vec<DisparityEntry>,
    /// Pairs where either ratio was undefined and the gap was set to 0.
    pub undefined_pairs: usize,
    pub bins: Vec<BinSummary>,
}

pub fn disparity_scores(g: &GraphBundle, k: usize) -> Result<DisparityReport> {
    let train = g.train_nodes()?;
    let test = g.eval_nodes();
    let f = aggregate(g, k, AggregationMode::SelfLoop).features;
    let h = node_homophily(g, k.max(1))?;
    let entries: Vec<(DisparityEntry, bool)> = test
        .par_iter()
        .map(|&u| {
            let (v, distance) = nearest(&f, train, f.row(u)).expect("train set is non-empty");
            let (gap, undefined) = match (h.per_node[u], h.per_node[v]) {
                (Some(a), Some(b)) => ((a - b).abs(), false),
                _ => (0.0, true),
            };
            let entry = DisparityEntry {
                node: u,
                nearest: v,
                distance,
                hom_gap: gap,
                score: distance + gap,
                bin: None,
            };
            (entry, undefined)
        })
        .collect();
    let undefined_pairs = entries.iter().filter(|e| e.1).count();
    Ok(DisparityReport {
        hop: k,
        variant: ScoreVariant::Combined,
        entries: entries.into_iter().map(|e| e.0).collect(),
        undefined_pairs,
        bins: Vec::new(),
    })
}

/// Bin by the combined score.
pub fn partition_bins(report: DisparityReport, bins: usize) -> Result<DisparityReport> {
    partition_bins_by(report, bins, ScoreVariant::Combined)
}

/// Stable sort by `(value, node)` and cut into `bins` contiguous groups whose
/// sizes differ by at most one; the first `len % bins` groups are larger.
pub fn partition_bins_by(mut report: DisparityReport, bins: usize, variant: ScoreVariant) -> Result<DisparityReport> {
    let n = report.entries.len();
    if bins == 0 || n < bins {
        return Err(Error::TooFewNodes { have: n, bins });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (&report.entries[a], &report.entries[b]);
        ea.value(variant).total_cmp(&eb.value(variant)).then(ea.node.cmp(&eb.node))
    });
    let (base, extra) = (n / bins, n % bins);
    let mut summaries = Vec::with_capacity(bins);
    let mut pos = 0;
    for b in 0..bins {
        let size = base + usize::from(b < extra);
        let mut total = 0.0;
        for &idx in &order[pos..pos + size] {
            report.entries[idx].bin = Some(b + 1);
            total += report.entries[idx].value(variant);
        }
        summaries.push(BinSummary {
            bin: b + 1,
            count: size,
            mean_score: total / size as f64,
            accuracy: None,
        });
        pos += size;
    }
    report.variant = variant;
    report.bins = summaries;
    Ok(report)
}

impl DisparityReport {
    /// Fill per-bin accuracy from per-node predictions (indexed by node id).
    pub fn record_predictions(&mut self, predictions: &[usize], labels: &[usize]) {
        let mut hits = vec![0usize; self.bins.len()];
        for e in &self.entries {
            if let Some(b) = e.bin {
                hits[b - 1] += usize::from(predictions[e.node] == labels[e.node]);
            }
        }
        for (s, h) in self.bins.iter_mut().zip(hits) {
            s.accuracy = Some(h as f64 / s.count as f64);
        }
    }

    pub fn bin_accuracies(&self) -> Vec<Option<f64>> {
        self.bins.iter().map(|b| b.accuracy).collect()
    }
}
