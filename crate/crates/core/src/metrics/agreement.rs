//! Local agreement among nearest training nodes.
//!
//! A test node "agrees" when more than half of its `knn` nearest training
//! nodes (L2 on k-hop features) share one label. The local accuracy is the
//! share of agreeing nodes whose own label is that label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::k_nearest;
use crate::aggregate::{aggregate, AggregationMode};
use crate::error::{Error, Result};
use crate::graph::GraphBundle;

pub const DEFAULT_KNN: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub hop: usize,
    pub knn: usize,
    pub evaluated: usize,
    pub ratio: f64,
    /// Local accuracy over all agreeing test nodes.
    pub accuracy: Option<f64>,
    pub accuracy_majority: Option<f64>,
    pub accuracy_minority: Option<f64>,
}

/// `majority` and `minority` restrict the per-pattern accuracies; nodes in
/// neither still count toward the ratio and overall accuracy.
pub fn local_agreement(
    g: &GraphBundle,
    k: usize,
    knn: usize,
    majority: &[usize],
    minority: &[usize],
) -> Result<AgreementReport> {
    let train = g.train_nodes()?;
    if knn == 0 || knn > train.len() {
        return Err(Error::invalid(format!(
            "knn={knn} must lie in 1..={} (train size)",
            train.len()
        )));
    }
    let f = aggregate(g, k, AggregationMode::SelfLoop).features;
    let labels = g.labels();
    let test = g.eval_nodes();
    let votes: Vec<Option<usize>> = test
        .par_iter()
        .map(|&u| {
            let mut counts = vec![0usize; g.num_classes()];
            for (v, _) in k_nearest(&f, train, f.row(u), knn) {
                counts[labels[v]] += 1;
            }
            counts.iter().position(|&c| 2 * c > knn)
        })
        .collect();

    let mut agreed = vec![None; g.num_nodes()];
    for (&u, &v) in test.iter().zip(&votes) {
        agreed[u] = v;
    }
    let local_acc = |nodes: &mut dyn Iterator<Item = usize>| {
        let (mut hits, mut total) = (0usize, 0usize);
        for u in nodes {
            if let Some(c) = agreed[u] {
                total += 1;
                hits += usize::from(c == labels[u]);
            }
        }
        (total > 0).then(|| hits as f64 / total as f64)
    };
    let agreeing = votes.iter().filter(|v| v.is_some()).count();
    Ok(AgreementReport {
        hop: k,
        knn,
        evaluated: test.len(),
        ratio: agreeing as f64 / test.len() as f64,
        accuracy: local_acc(&mut test.iter().copied()),
        accuracy_majority: local_acc(&mut majority.iter().copied()),
        accuracy_minority: local_acc(&mut minority.iter().copied()),
    })
}
