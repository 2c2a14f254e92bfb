//! Two-class contextual stochastic block model with structural subgroups.
//!
//! Every node draws a class (exact balanced split) and a subgroup; features
//! are `N(μ_class, I)` regardless of subgroup. Subgroup `j` carries an
//! intra-class rate `p_j` and an inter-class rate `q_j`.
//!
//! Edges between nodes of different subgroups use
//! [`CrossRule::NormalizedProduct`] by default: the probability for an
//! intra-class pair from subgroups `a`, `b` is `p_a·p_b / p̄` with
//! `p̄ = Σ_j π_j p_j` (likewise for `q`), capped at 1. Summed over the
//! partner subgroup this reproduces each node's single-pattern expected
//! same-class and cross-class neighbor counts, so subgroup homophily stays
//! at `p_j / (p_j + q_j)` unless the cap binds. With one subgroup it
//! reduces to plain `p`/`q`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::matrix::{l2_dist, Matrix};
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassMeans {
    Explicit { mu1: Vec<f64>, mu2: Vec<f64> },
    /// Means at `±(ρ/2)·e₁` in `dim` dimensions.
    Separation { rho: f64, dim: usize },
}

impl ClassMeans {
    pub fn resolve(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ClassMeans::Explicit { mu1, mu2 } => (mu1.clone(), mu2.clone()),
            ClassMeans::Separation { rho, dim } => {
                let mut mu1 = vec![0.0; *dim];
                let mut mu2 = vec![0.0; *dim];
                if *dim > 0 {
                    mu1[0] = rho / 2.0;
                    mu2[0] = -rho / 2.0;
                }
                (mu1, mu2)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClassMeans::Explicit { mu1, .. } => mu1.len(),
            ClassMeans::Separation { dim, .. } => *dim,
        }
    }

    /// `ρ = ‖μ1 − μ2‖`.
    pub fn rho(&self) -> f64 {
        let (a, b) = self.resolve();
        l2_dist(&a, &b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgroupRates {
    pub p: f64,
    pub q: f64,
    /// Membership probability.
    #[serde(default = "one")]
    pub prob: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

impl SubgroupRates {
    pub fn new(p: f64, q: f64, prob: f64) -> Self {
        SubgroupRates { p, q, prob }
    }

    /// Expected homophily `p / (p + q)`.
    pub fn homophily(&self) -> f64 {
        self.p / (self.p + self.q)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossRule {
    #[default]
    NormalizedProduct,
    /// Arithmetic mean of the two endpoints' applicable rates.
    Mean,
}

/// Covariance scale used when sampling aggregated features directly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceScale {
    /// `I/√d` (standard deviation `d^{-1/4}`).
    #[default]
    SqrtDegree,
    /// `I/d`, the variance of a mean of `d` unit-variance rows.
    Degree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsbmSpec {
    pub num_nodes: usize,
    pub means: ClassMeans,
    pub subgroups: Vec<SubgroupRates>,
    /// Fraction of nodes in class 0.
    #[serde(default = "half")]
    pub class_balance: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Require `p_j + q_j` equal across subgroups.
    #[serde(default = "yes")]
    pub equal_degree: bool,
    #[serde(default)]
    pub cross_rule: CrossRule,
    #[serde(default)]
    pub variance_scale: VarianceScale,
}

impl CsbmSpec {
    pub fn new(num_nodes: usize, means: ClassMeans, subgroups: Vec<SubgroupRates>) -> Self {
        CsbmSpec {
            num_nodes,
            means,
            subgroups,
            class_balance: 0.5,
            seed: None,
            equal_degree: true,
            cross_rule: CrossRule::default(),
            variance_scale: VarianceScale::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.subgroups.is_empty() {
            return Err(Error::invalid("at least one subgroup is required"));
        }
        for (j, s) in self.subgroups.iter().enumerate() {
            for (name, v) in [("p", s.p), ("q", s.q), ("prob", s.prob)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid(format!("subgroup {j}: {name}={v} outside [0,1]")));
                }
            }
        }
        let total: f64 = self.subgroups.iter().map(|s| s.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("subgroup probabilities sum to {total}, not 1")));
        }
        if self.equal_degree {
            let s0 = self.subgroups[0].p + self.subgroups[0].q;
            for (j, s) in self.subgroups.iter().enumerate().skip(1) {
                if ((s.p + s.q) - s0).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "subgroup {j}: p+q={} differs from {s0}; equal-degree constraint",
                        s.p + s.q
                    )));
                }
            }
        }
        if !(self.class_balance > 0.0 && self.class_balance < 1.0) {
            return Err(Error::invalid("class_balance must lie in (0,1)"));
        }
        match &self.means {
            ClassMeans::Explicit { mu1, mu2 } => {
                if mu1.is_empty() || mu1.len() != mu2.len() {
                    return Err(Error::invalid("mu1 and mu2 must be non-empty and equal length"));
                }
                if mu1.iter().chain(mu2).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("class means must be finite"));
                }
            }
            ClassMeans::Separation { rho, dim } => {
                if *dim == 0 || !rho.is_finite() || *rho < 0.0 {
                    return Err(Error::invalid("rho must be finite and non-negative, dim positive"));
                }
            }
        }
        Ok(())
    }

    /// Edge probability table indexed `[a][b][same_class as usize]`.
    pub fn edge_probabilities(&self) -> Vec<Vec<[f64; 2]>> {
        let m = self.subgroups.len();
        let sg = &self.subgroups;
        let p_bar: f64 = sg.iter().map(|s| s.prob * s.p).sum();
        let q_bar: f64 = sg.iter().map(|s| s.prob * s.q).sum();
        let mut table = vec![vec![[0.0; 2]; m]; m];
        for a in 0..m {
            for b in 0..m {
                let (same, cross) = if m == 1 {
                    (sg[a].p, sg[a].q)
                } else {
                    match self.cross_rule {
                        CrossRule::Mean => ((sg[a].p + sg[b].p) / 2.0, (sg[a].q + sg[b].q) / 2.0),
                        CrossRule::NormalizedProduct => {
                            let f = |x: f64, y: f64, bar: f64| {
                                if bar > 0.0 {
                                    (x * y / bar).min(1.0)
                                } else {
                                    0.0
                                }
                            };
                            (f(sg[a].p, sg[b].p, p_bar), f(sg[a].q, sg[b].q, q_bar))
                        }
                    }
                };
                table[a][b] = [cross, same];
            }
        }
        table
    }

    /// Expected one-hop mean-aggregated feature for `class` (0 ↔ μ1, 1 ↔ μ2) in
    /// `subgroup`: `(p·μ_own + q·μ_other) / (p + q)`.
    pub fn aggregated_mean(&self, class: usize, subgroup: usize) -> Result<Vec<f64>> {
        let s = self
            .subgroups
            .get(subgroup)
            .ok_or(Error::OutOfRange {
                what: "subgroup",
                index: subgroup,
                bound: self.subgroups.len(),
            })?;
        let (mu1, mu2) = self.means.resolve();
        let denom = s.p + s.q;
        if denom <= 0.0 {
            return Err(Error::invalid(format!("subgroup {subgroup} has p+q=0")));
        }
        let (w1, w2) = match class {
            0 => (s.p, s.q),
            1 => (s.q, s.p),
            _ => {
                return Err(Error::OutOfRange {
                    what: "class",
                    index: class,
                    bound: 2,
                })
            }
        };
        Ok(mu1
            .iter()
            .zip(&mu2)
            .map(|(a, b)| (w1 * a + w2 * b) / denom)
            .collect())
    }
}

/// Sample a graph bundle. Deterministic given `spec.seed`.
pub fn generate(spec: &CsbmSpec) -> Result<GraphBundle> {
    spec.validate()?;
    let seed = spec
        .seed
        .ok_or_else(|| Error::invalid("CSBM spec has no seed"))?;
    let n = spec.num_nodes;
    if n < 2 {
        return Err(Error::invalid("CSBM generation needs at least 2 nodes"));
    }

    let n0 = ((spec.class_balance * n as f64).ceil() as usize).clamp(1, n - 1);
    let mut labels: Vec<usize> = (0..n).map(|i| usize::from(i >= n0)).collect();
    labels.shuffle(&mut substream(seed, "classes"));

    let mut rng = substream(seed, "subgroups");
    let cumulative: Vec<f64> = spec
        .subgroups
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s.prob;
            Some(*acc)
        })
        .collect();
    let last = spec.subgroups.len() - 1;
    let tags: Vec<u32> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cumulative.iter().position(|&c| u < c).unwrap_or(last) as u32
        })
        .collect();

    let (mu1, mu2) = spec.means.resolve();
    let d = mu1.len();
    let mut rng = substream(seed, "features");
    let mut features = Matrix::zeros(n, d);
    for i in 0..n {
        let mu = if labels[i] == 0 { &mu1 } else { &mu2 };
        for (x, m) in features.row_mut(i).iter_mut().zip(mu) {
            let z: f64 = rng.sample(StandardNormal);
            *x = m + z;
        }
    }

    let probs = spec.edge_probabilities();
    let mut rng = substream(seed, "edges");
    let mut edges = Vec::new();
    for u in 0..n {
        let row = &probs[tags[u] as usize];
        for v in u + 1..n {
            let pr = row[tags[v] as usize][usize::from(labels[u] == labels[v])];
            let coin: f64 = rng.random();
            if coin < pr {
                edges.push((u, v));
            }
        }
    }

    GraphBundle::new("csbm", 2, edges, features, labels)?.with_subgroups(tags)
}

/// Draw `count` aggregated feature rows for a node of `class` in `subgroup`
/// with degree `degree`, without building a graph.
pub fn sample_aggregated<R: Rng + ?Sized>(
    spec: &CsbmSpec,
    class: usize,
    subgroup: usize,
    degree: f64,
    count: usize,
    rng: &mut R,
) -> Result<Matrix> {
    if !(degree >= 1.0) || !degree.is_finite() {
        return Err(Error::invalid(format!("degree must be at least 1, got {degree}")));
    }
    let mean = spec.aggregated_mean(class, subgroup)?;
    let sd = match spec.variance_scale {
        VarianceScale::SqrtDegree => degree.powf(-0.25),
        VarianceScale::Degree => degree.powf(-0.5),
    };
    let d = mean.len();
    let mut out = Matrix::zeros(count, d);
    for i in 0..count {
        for (x, m) in out.row_mut(i).iter_mut().zip(&mean) {
            let z: f64 = rng.sample(StandardNormal);
            *x = m + sd * z;
        }
    }
    Ok(out)
}

/// Distance between the aggregated means of two subgroups for one class.
pub fn aggregated_mean_distance(spec: &CsbmSpec, a: usize, b: usize, class: usize) -> Result<f64> {
    let ma = spec.aggregated_mean(class, a)?;
    let mb = spec.aggregated_mean(class, b)?;
    Ok(l2_dist(&ma, &mb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homophily::node_homophily;
    use rand::SeedableRng;

    fn single(n: usize, p: f64, q: f64) -> CsbmSpec {
        CsbmSpec::new(n, ClassMeans::Separation { rho: 1.0, dim: 2 }, vec![SubgroupRates::new(p, q, 1.0)])
            .with_seed(11)
    }

    #[test]
    fn full_rates_give_complete_graph() {
        let g = generate(&single(12, 1.0, 1.0)).unwrap();
        assert_eq!(g.num_edges(), 12 * 11 / 2);
    }

    #[test]
    fn balanced_classes_and_determinism() {
        let spec = single(101, 0.1, 0.05);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labels().iter().filter(|&&y| y == 0).count(), 51);
        let c = generate(&spec.clone().with_seed(12)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn validation_errors() {
        assert!(generate(&single(1, 0.5, 0.5)).is_err());
        let mut s = single(10, 0.5, 0.5);
        s.seed = None;
        assert!(generate(&s).is_err());
        let mut s = single(10, 0.5, 0.5);
        s.subgroups = vec![SubgroupRates::new(0.5, 0.1, 0.5), SubgroupRates::new(0.1, 0.2, 0.5)];
        assert!(s.validate().is_err());
        s.equal_degree = false;
        assert!(s.validate().is_ok());
        s.subgroups[1].prob = 0.2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn eq1_means() {
        let spec = CsbmSpec::new(
            10,
            ClassMeans::Explicit { mu1: vec![1.0, 0.0], mu2: vec![0.0, 11.0] },
            vec![SubgroupRates::new(0.01, 0.001, 1.0)],
        );
        let m = spec.aggregated_mean(0, 0).unwrap();
        // (10μ1 + μ2)/11
        assert!((m[0] - 10.0 / 11.0).abs() < 1e-15);
        assert!((m[1] - 1.0).abs() < 1e-15);
        let sym = CsbmSpec::new(10, spec.means.clone(), vec![SubgroupRates::new(0.3, 0.3, 1.0)]);
        assert_eq!(sym.aggregated_mean(0, 0).unwrap(), sym.aggregated_mean(1, 0).unwrap());
        assert_eq!(sym.aggregated_mean(0, 0).unwrap(), vec![0.5, 5.5]);
    }

    #[test]
    fn mean_distance_examples() {
        let spec = CsbmSpec::new(
            10,
            ClassMeans::Separation { rho: 1.0, dim: 3 },
            vec![SubgroupRates::new(0.9, 0.1, 0.5), SubgroupRates::new(0.1, 0.9, 0.5)],
        );
        assert!((aggregated_mean_distance(&spec, 0, 1, 0).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(aggregated_mean_distance(&spec, 1, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn sampling_rejects_zero_degree() {
        let spec = single(10, 0.2, 0.1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!(sample_aggregated(&spec, 0, 0, 0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn product_rule_table_reduces_to_rates_for_one_subgroup() {
        let spec = single(10, 0.3, 0.2);
        assert_eq!(spec.edge_probabilities(), vec![vec![[0.2, 0.3]]]);
    }

    #[test]
    fn product_rule_preserves_expected_counts_without_cap() {
        let mut spec = single(10, 0.0, 0.0);
        spec.subgroups = vec![SubgroupRates::new(0.02, 0.01, 0.7), SubgroupRates::new(0.01, 0.02, 0.3)];
        let t = spec.edge_probabilities();
        for a in 0..2 {
            let same: f64 = (0..2).map(|b| spec.subgroups[b].prob * t[a][b][1]).sum();
            let cross: f64 = (0..2).map(|b| spec.subgroups[b].prob * t[a][b][0]).sum();
            assert!((same - spec.subgroups[a].p).abs() < 1e-15);
            assert!((cross - spec.subgroups[a].q).abs() < 1e-15);
        }
    }

    #[test]
    fn two_subgroups_separate_in_homophily() {
        let mut above = 0;
        for seed in 0..10 {
            let mut spec = single(600, 0.0, 0.0).with_seed(seed);
            spec.subgroups = vec![SubgroupRates::new(0.01, 0.005, 0.5), SubgroupRates::new(0.005, 0.01, 0.5)];
            let g = generate(&spec).unwrap();
            let h = node_homophily(&g, 1).unwrap();
            let tags = g.subgroups().unwrap();
            let nodes = |t: u32| (0..g.num_nodes()).filter(|&i| tags[i] == t).collect::<Vec<_>>();
            let homo = h.mean_over(&nodes(0)).unwrap();
            let hete = h.mean_over(&nodes(1)).unwrap();
            if homo > 0.5 && 0.5 > hete {
                above += 1;
            }
        }
        assert_eq!(above, 10);
    }
}
