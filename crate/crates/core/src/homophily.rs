//! Node homophily ratios over exact-distance hop shells.
//!
//! `N_k(v)` is the set of nodes at shortest-path distance exactly `k` from
//! `v`, so shells for different `k` never overlap and `N_1` is the
//! adjacency list. A node with an empty shell has an undefined ratio and is
//! left out of the graph-level mean.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphBundle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomophilyProfile {
    pub hop: usize,
    /// `None` where the hop shell is empty.
    pub per_node: Vec<Option<f64>>,
    /// Mean over defined nodes; `None` when no node is defined.
    pub graph: Option<f64>,
}

impl HomophilyProfile {
    pub fn defined_count(&self) -> usize {
        self.per_node.iter().filter(|h| h.is_some()).count()
    }

    /// Mean ratio over `nodes`, skipping undefined entries.
    pub fn mean_over(&self, nodes: &[usize]) -> Option<f64> {
        let vals: Vec<f64> = nodes.iter().filter_map(|&i| self.per_node[i]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Dense bitset adjacency is used below this node count when the graph is
/// dense enough for shell expansion by word-wise OR to pay off.
const BITSET_MAX_NODES: usize = 1 << 14;
const BITSET_MIN_AVG_DEGREE: f64 = 16.0;

pub fn node_homophily(g: &GraphBundle, k: usize) -> Result<HomophilyProfile> {
    if k == 0 {
        return Err(Error::invalid("hop order must be at least 1"));
    }
    let counts = shell_label_counts(g, k);
    let per_node: Vec<Option<f64>> = counts
        .iter()
        .map(|&(same, total)| (total > 0).then(|| same as f64 / total as f64))
        .collect();
    let defined: Vec<f64> = per_node.iter().flatten().copied().collect();
    let graph = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(HomophilyProfile {
        hop: k,
        per_node,
        graph,
    })
}

/// For every node, (same-label count, size) of its distance-`k` shell.
pub fn shell_label_counts(g: &GraphBundle, k: usize) -> Vec<(usize, usize)> {
    let n = g.num_nodes();
    let labels = g.labels();
    if k == 1 {
        return (0..n)
            .map(|i| {
                let nb = g.neighbors(i);
                let same = nb.iter().filter(|&&j| labels[j] == labels[i]).count();
                (same, nb.len())
            })
            .collect();
    }
    let avg_degree = 2.0 * g.num_edges() as f64 / n as f64;
    if n <= BITSET_MAX_NODES && avg_degree >= BITSET_MIN_AVG_DEGREE {
        bitset_shell_counts(g, k)
    } else {
        bfs_shell_counts(g, k)
    }
}

fn bfs_shell_counts(g: &GraphBundle, k: usize) -> Vec<(usize, usize)> {
    let n = g.num_nodes();
    let labels = g.labels();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![u32::MAX; n], 0u32, Vec::new(), Vec::new()),
            |(stamp, epoch, frontier, next), v| {
                *epoch = epoch.wrapping_add(1);
                if *epoch == u32::MAX {
                    stamp.iter_mut().for_each(|s| *s = u32::MAX);
                    *epoch = 0;
                }
                frontier.clear();
                frontier.push(v);
                stamp[v] = *epoch;
                for _ in 0..k {
                    next.clear();
                    for &u in frontier.iter() {
                        for &w in g.neighbors(u) {
                            if stamp[w] != *epoch {
                                stamp[w] = *epoch;
                                next.push(w);
                            }
                        }
                    }
                    std::mem::swap(frontier, next);
                    if frontier.is_empty() {
                        break;
                    }
                }
                let same = frontier.iter().filter(|&&u| labels[u] == labels[v]).count();
                (same, frontier.len())
            },
        )
        .collect()
}

fn bitset_shell_counts(g: &GraphBundle, k: usize) -> Vec<(usize, usize)> {
    let n = g.num_nodes();
    let words = n.div_ceil(64);
    let mut adj = vec![0u64; n * words];
    for &(u, v) in g.edges() {
        adj[u * words + v / 64] |= 1 << (v % 64);
        adj[v * words + u / 64] |= 1 << (u % 64);
    }
    let mut class_bits = vec![vec![0u64; words]; g.num_classes()];
    for (i, &y) in g.labels().iter().enumerate() {
        class_bits[y][i / 64] |= 1 << (i % 64);
    }
    let labels = g.labels();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u64; words], vec![0u64; words], vec![0u64; words]),
            |(visited, frontier, next), v| {
                visited.iter_mut().for_each(|w| *w = 0);
                frontier.iter_mut().for_each(|w| *w = 0);
                visited[v / 64] |= 1 << (v % 64);
                frontier[v / 64] |= 1 << (v % 64);
                for _ in 0..k {
                    next.iter_mut().for_each(|w| *w = 0);
                    for (wi, &word) in frontier.iter().enumerate() {
                        let mut bits = word;
                        while bits != 0 {
                            let u = wi * 64 + bits.trailing_zeros() as usize;
                            bits &= bits - 1;
                            for (nw, aw) in next.iter_mut().zip(&adj[u * words..(u + 1) * words]) {
                                *nw |= aw;
                            }
                        }
                    }
                    for (nw, vw) in next.iter_mut().zip(visited.iter_mut()) {
                        *nw &= !*vw;
                        *vw |= *nw;
                    }
                    std::mem::swap(frontier, next);
                }
                let cls = &class_bits[labels[v]];
                let total: u32 = frontier.iter().map(|w| w.count_ones()).sum();
                let same: u32 = frontier
                    .iter()
                    .zip(cls)
                    .map(|(w, c)| (w & c).count_ones())
                    .sum();
                (same as usize, total as usize)
            },
        )
        .collect()
}

/// Shells `N_1..=N_kmax` of a single node by breadth-first search.
pub fn hop_shells(g: &GraphBundle, v: usize, kmax: usize) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.num_nodes()];
    seen[v] = true;
    let mut frontier = vec![v];
    let mut shells = Vec::with_capacity(kmax);
    for _ in 0..kmax {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        next.sort_unstable();
        shells.push(next.clone());
        frontier = next;
    }
    shells
}
