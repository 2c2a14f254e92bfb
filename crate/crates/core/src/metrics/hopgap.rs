//! Homophily differences to the nearest training node across hop orders.

use serde::{Deserialize, Serialize};

use super::nearest;
use crate::aggregate::{aggregate, AggregationMode};
use crate::error::Result;
use crate::graph::GraphBundle;
use crate::homophily::node_homophily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopGap {
    pub hop: usize,
    /// Mean `|h_u − h_v|` over pairs where both ratios are defined.
    pub mean_gap: Option<f64>,
    pub counted: usize,
    pub undefined: usize,
}

/// `v` is the nearest training node of `u` on `feature_hop`-hop self-loop
/// aggregated features, fixed across all hop orders `1..=kmax`.
pub fn hop_homophily_gap(g: &GraphBundle, nodes: &[usize], kmax: usize, feature_hop: usize) -> Result<Vec<HopGap>> {
    let train = g.train_nodes()?;
    let f = aggregate(g, feature_hop, AggregationMode::SelfLoop).features;
    let pairs: Vec<(usize, usize)> = nodes
        .iter()
        .map(|&u| (u, nearest(&f, train, f.row(u)).expect("train set is non-empty").0))
        .collect();
    (1..=kmax)
        .map(|k| {
            let h = node_homophily(g, k)?;
            let gaps: Vec<f64> = pairs
                .iter()
                .filter_map(|&(u, v)| Some((h.per_node[u]? - h.per_node[v]?).abs()))
                .collect();
            Ok(HopGap {
                hop: k,
                mean_gap: (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64),
                counted: gaps.len(),
                undefined: pairs.len() - gaps.len(),
            })
        })
        .collect()
}
