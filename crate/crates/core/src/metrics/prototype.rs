//! Class prototypes and the relative discriminative ratio.
//!
//! For class `i`, `μ_i^tr`, `μ_i^ma` and `μ_i^mi` are mean k-hop features of
//! train, majority-test and minority-test nodes. The ratio
//! `r = Σ_i ‖μ_i^tr − μ_i^ma‖ / ‖μ_i^tr − μ_i^mi‖` is below the class count
//! when minority nodes sit further from the training prototypes than
//! majority nodes do.

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, AggregationMode};
use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::matrix::l2_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPrototype {
    pub class: usize,
    pub train: Vec<f64>,
    pub majority: Vec<f64>,
    pub minority: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSet {
    pub hop: usize,
    pub classes: Vec<ClassPrototype>,
    /// Classes missing a node in at least one role.
    pub excluded: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub hop: usize,
    pub ratio: f64,
    /// `(class, ‖μ^tr − μ^ma‖ / ‖μ^tr − μ^mi‖)` for included classes.
    pub per_class: Vec<(usize, f64)>,
    pub excluded: Vec<usize>,
    /// Whether `ratio` was divided by the number of included classes.
    pub normalized: bool,
}

pub fn prototypes(g: &GraphBundle, k: usize, majority: &[usize], minority: &[usize]) -> Result<PrototypeSet> {
    let train = g.train_nodes()?;
    let f = aggregate(g, k, AggregationMode::SelfLoop).features;
    let labels = g.labels();
    let of_class = |nodes: &[usize], c: usize| nodes.iter().copied().filter(|&i| labels[i] == c).collect::<Vec<_>>();
    let mut classes = Vec::new();
    let mut excluded = Vec::new();
    for c in 0..g.num_classes() {
        let tr = f.mean_of_rows(&of_class(train, c));
        let ma = f.mean_of_rows(&of_class(majority, c));
        let mi = f.mean_of_rows(&of_class(minority, c));
        match (tr, ma, mi) {
            (Some(train), Some(majority), Some(minority)) => classes.push(ClassPrototype {
                class: c,
                train,
                majority,
                minority,
            }),
            _ => excluded.push(c),
        }
    }
    Ok(PrototypeSet { hop: k, classes, excluded })
}

pub fn discriminative_ratio(
    g: &GraphBundle,
    k: usize,
    majority: &[usize],
    minority: &[usize],
    normalize: bool,
) -> Result<RatioReport> {
    let set = prototypes(g, k, majority, minority)?;
    let mut per_class = Vec::with_capacity(set.classes.len());
    for p in &set.classes {
        let den = l2_dist(&p.train, &p.minority);
        if den == 0.0 {
            return Err(Error::DegenerateDenominator { class: p.class });
        }
        per_class.push((p.class, l2_dist(&p.train, &p.majority) / den));
    }
    let mut ratio: f64 = per_class.iter().map(|x| x.1).sum();
    if normalize && !per_class.is_empty() {
        ratio /= per_class.len() as f64;
    }
    Ok(RatioReport {
        hop: k,
        ratio,
        per_class,
        excluded: set.excluded,
        normalized: normalize,
    })
}
