//! Empirical evaluation of the subgroup generalization bound terms.
//!
//! For a trained model and a partition of test nodes into subgroups `V_m`:
//!
//! * `ε_m = max_{u∈V_m} min_{v∈V_tr} ‖F_u − F_v‖` on the model's input features;
//! * `term_a = K ρ/(√(2π)σ) (ε_m + |h_tr − h_m| ρ)`;
//! * `term_b = b Σ_l ‖W_l‖_F² / ((γ/8)^{2/L} N^α) · ε_m^{2/L}`;
//! * `R = N^{2α−1} + N^{−2α} ln(L C (2B_m)^{1/L} / (γ^{1/L} δ))`.
//!
//! `h` is the subgroup-mean 1-hop homophily, `b` the widest layer, `C` the
//! largest per-layer Frobenius norm and `B_m` the largest feature norm over
//! `V_tr ∪ V_m`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::homophily::node_homophily;
use crate::matrix::{l2_dist, norm, Matrix};
use crate::metrics::nearest;
use crate::models::{margin_loss, LinearStack};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub gamma: f64,
    pub alpha: f64,
    pub delta: f64,
    /// Overrides the plug-in estimate when set.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl Default for BoundParams {
    fn default() -> Self {
        BoundParams {
            gamma: 0.1,
            alpha: 0.2,
            delta: 0.05,
            rho: None,
            sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupBound {
    pub name: String,
    pub size: usize,
    pub epsilon: f64,
    pub h_subgroup: Option<f64>,
    pub homophily_diff: f64,
    pub feature_bound: f64,
    pub term_a: f64,
    pub term_b: f64,
    pub term_r: f64,
    /// 0/1 loss on the subgroup.
    pub test_loss: f64,
    /// `test_loss − L̂^γ` on the training set.
    pub empirical_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n_train: usize,
    pub num_classes: usize,
    pub num_layers: usize,
    pub width: usize,
    pub weight_norm_sq: f64,
    pub max_layer_norm: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub delta: f64,
    pub rho: f64,
    pub sigma: f64,
    pub h_train: Option<f64>,
    pub train_margin_loss: f64,
    pub subgroups: Vec<SubgroupBound>,
}

pub fn term_a(num_classes: usize, rho: f64, sigma: f64, epsilon: f64, homophily_diff: f64) -> f64 {
    num_classes as f64 * rho / ((2.0 * PI).sqrt() * sigma) * (epsilon + homophily_diff * rho)
}

pub fn term_b(width: usize, weight_norm_sq: f64, gamma: f64, layers: usize, n_train: usize, alpha: f64, epsilon: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("margin gamma must be positive for the norm term"));
    }
    let l = layers as f64;
    let denom = (gamma / 8.0).powf(2.0 / l) * (n_train as f64).powf(alpha);
    Ok(width as f64 * weight_norm_sq / denom * epsilon.powf(2.0 / l))
}

pub fn term_r(n_train: usize, alpha: f64, layers: usize, max_layer_norm: f64, feature_bound: f64, gamma: f64, delta: f64) -> f64 {
    let n = n_train as f64;
    let l = layers as f64;
    let inner = l * max_layer_norm * (2.0 * feature_bound).powf(1.0 / l) / (gamma.powf(1.0 / l) * delta);
    n.powf(2.0 * alpha - 1.0) + n.powf(-2.0 * alpha) * inner.ln()
}

/// Mean distance over all pairs of class-wise means of raw train features.
pub fn estimate_rho(g: &GraphBundle) -> Result<f64> {
    let train = g.train_nodes()?;
    let labels = g.labels();
    let means: Vec<Vec<f64>> = (0..g.num_classes())
        .filter_map(|c| {
            let nodes: Vec<usize> = train.iter().copied().filter(|&i| labels[i] == c).collect();
            g.features().mean_of_rows(&nodes)
        })
        .collect();
    if means.len() < 2 {
        return Err(Error::invalid("rho estimate needs train nodes from two classes"));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            total += l2_dist(&means[i], &means[j]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Pooled within-class standard deviation per coordinate of `x` over train
/// nodes: `sqrt(SS_within / ((N − K) d))`.
pub fn estimate_sigma(x: &Matrix, train: &[usize], labels: &[usize], num_classes: usize) -> Result<f64> {
    let mut groups = vec![Vec::new(); num_classes];
    for &i in train {
        groups[labels[i]].push(i);
    }
    let present = groups.iter().filter(|g| !g.is_empty()).count();
    if train.len() <= present {
        return Err(Error::invalid("sigma estimate needs more train nodes than classes"));
    }
    let mut ss = 0.0;
    for nodes in groups.iter().filter(|g| !g.is_empty()) {
        let mean = x.mean_of_rows(nodes).expect("non-empty");
        for &i in nodes {
            ss += crate::matrix::sq_dist(x.row(i), &mean);
        }
    }
    Ok((ss / ((train.len() - present) * x.cols()) as f64).sqrt())
}

pub fn bound_terms(g: &GraphBundle, model: &LinearStack, subgroups: &[(String, Vec<usize>)], params: &BoundParams) -> Result<BoundReport> {
    if !(params.gamma > 0.0) {
        return Err(Error::invalid("margin gamma must be positive"));
    }
    if !(params.alpha > 0.0 && params.alpha < 0.25) {
        return Err(Error::invalid("alpha must lie in (0, 1/4)"));
    }
    if !(params.delta > 0.0 && params.delta < 1.0) {
        return Err(Error::invalid("delta must lie in (0, 1)"));
    }
    model.validate()?;
    let train = g.train_nodes()?;
    let labels = g.labels();
    let x = model.input_features(g);
    let logits = model.logits(&x);
    let h = node_homophily(g, 1)?;
    let h_train = h.mean_over(train);

    let rho = match params.rho {
        Some(r) => r,
        None => estimate_rho(g)?,
    };
    let sigma = match params.sigma {
        Some(s) => s,
        None => estimate_sigma(&x, train, labels, g.num_classes())?,
    };
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma must be positive"));
    }

    let layers = model.num_layers();
    let width = model.widths.iter().copied().max().unwrap_or(0);
    let weight_norm_sq = model.weight_norm_sq();
    let max_layer_norm = model
        .layers
        .iter()
        .map(|l| l.weight.frobenius_sq().sqrt())
        .fold(0.0, f64::max);
    let train_margin_loss = margin_loss(&logits, labels, train, params.gamma);
    let train_norm = train.iter().map(|&i| norm(x.row(i))).fold(0.0, f64::max);

    let subgroups = subgroups
        .iter()
        .map(|(name, nodes)| {
            let epsilon = epsilon_m(&x, train, nodes);
            let h_m = h.mean_over(nodes);
            let homophily_diff = match (h_train, h_m) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => 0.0,
            };
            let feature_bound = nodes.iter().map(|&i| norm(x.row(i))).fold(train_norm, f64::max);
            let test_loss = margin_loss(&logits, labels, nodes, 0.0);
            Ok(SubgroupBound {
                name: name.clone(),
                size: nodes.len(),
                epsilon,
                h_subgroup: h_m,
                homophily_diff,
                feature_bound,
                term_a: term_a(g.num_classes(), rho, sigma, epsilon, homophily_diff),
                term_b: term_b(width, weight_norm_sq, params.gamma, layers, train.len(), params.alpha, epsilon)?,
                term_r: term_r(train.len(), params.alpha, layers, max_layer_norm, feature_bound, params.gamma, params.delta),
                test_loss,
                empirical_gap: test_loss - train_margin_loss,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BoundReport {
        n_train: train.len(),
        num_classes: g.num_classes(),
        num_layers: layers,
        width,
        weight_norm_sq,
        max_layer_norm,
        gamma: params.gamma,
        alpha: params.alpha,
        delta: params.delta,
        rho,
        sigma,
        h_train,
        train_margin_loss,
        subgroups,
    })
}

/// Largest distance from a subgroup node to its nearest training node.
pub fn epsilon_m(x: &Matrix, train: &[usize], nodes: &[usize]) -> f64 {
    nodes
        .par_iter()
        .map(|&u| nearest(x, train, x.row(u)).map_or(0.0, |(_, d)| d))
        .reduce(|| 0.0, f64::max)
}
