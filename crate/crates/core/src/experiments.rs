//! Reproducible synthetic experiments built from the library pieces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::AggregationMode;
use crate::csbm::{generate, sample_aggregated, ClassMeans, CsbmSpec, SubgroupRates, VarianceScale};
use crate::error::{Error, Result};
use crate::graph::Masks;
use crate::models::{evaluate_with, train, EvalOptions, TrainConfig};
use crate::rng::{derive_seed, substream};
use crate::stats::{mean, std_dev};
use crate::theory::separability_threshold;

/// Two patterns `(0.9, 0.1)` and `(0.1, 0.9)` with `ρ = 1`, `d = 16`;
/// `pr_homo` is the share of homophilic nodes.
pub fn synthetic_family(num_nodes: usize, pr_homo: f64, seed: u64) -> CsbmSpec {
    CsbmSpec::new(
        num_nodes,
        ClassMeans::Separation { rho: 1.0, dim: 16 },
        vec![
            SubgroupRates::new(0.9, 0.1, pr_homo),
            SubgroupRates::new(0.1, 0.9, 1.0 - pr_homo),
        ],
    )
    .with_seed(seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2Config {
    pub num_nodes: usize,
    pub dim: usize,
    pub rho: f64,
    pub homophilic: Vec<(f64, f64)>,
    pub heterophilic: Vec<(f64, f64)>,
    /// Share of homophilic nodes in mixture cells.
    pub mixture_homophilic_share: f64,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
}

impl Default for D2Config {
    fn default() -> Self {
        D2Config {
            num_nodes: 500,
            dim: 50,
            rho: 0.1,
            homophilic: vec![(0.01, 0.005), (0.01, 0.003), (0.01, 0.001)],
            heterophilic: vec![(0.001, 0.005), (0.001, 0.003), (0.001, 0.002)],
            mixture_homophilic_share: 0.5,
            seeds: (0..10).collect(),
            train: TrainConfig {
                mode: AggregationMode::PlainMean,
                ..TrainConfig::logistic(1, 0)
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2Cell {
    pub row: usize,
    pub col: usize,
    /// Accuracy in percent, one per seed.
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Row 0 / column 0 stand for "no heterophilic" / "no homophilic" nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct D2Table {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<D2Cell>,
}

impl D2Table {
    pub fn cell(&self, row: usize, col: usize) -> Option<&D2Cell> {
        self.cells.iter().find(|c| c.row == row && c.col == col)
    }

    /// Mixture cells whose mean is not below both single-pattern means.
    pub fn ordering_violations(&self) -> Vec<(usize, usize)> {
        self.cells
            .iter()
            .filter(|c| c.row > 0 && c.col > 0)
            .filter(|c| {
                let homo = self.cell(0, c.col).map(|x| x.mean);
                let hete = self.cell(c.row, 0).map(|x| x.mean);
                !(homo.is_some_and(|h| c.mean < h) && hete.is_some_and(|h| c.mean < h))
            })
            .map(|c| (c.row, c.col))
            .collect()
    }
}

fn rate_label((p, q): (f64, f64)) -> String {
    format!("p={p} q={q}")
}

/// Logistic regression on one-hop mean features, trained and scored on
/// every node, for each single-pattern and mixture cell.
pub fn table_d2(cfg: &D2Config) -> Result<D2Table> {
    if cfg.seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let mut jobs = Vec::new();
    for row in 0..=cfg.heterophilic.len() {
        for col in 0..=cfg.homophilic.len() {
            if row + col > 0 {
                jobs.push((row, col));
            }
        }
    }
    let means = ClassMeans::Separation { rho: cfg.rho, dim: cfg.dim };
    let cells = jobs
        .par_iter()
        .map(|&(row, col)| {
            let subgroups = match (row, col) {
                (0, c) => vec![SubgroupRates::new(cfg.homophilic[c - 1].0, cfg.homophilic[c - 1].1, 1.0)],
                (r, 0) => vec![SubgroupRates::new(cfg.heterophilic[r - 1].0, cfg.heterophilic[r - 1].1, 1.0)],
                (r, c) => vec![
                    SubgroupRates::new(cfg.homophilic[c - 1].0, cfg.homophilic[c - 1].1, cfg.mixture_homophilic_share),
                    SubgroupRates::new(cfg.heterophilic[r - 1].0, cfg.heterophilic[r - 1].1, 1.0 - cfg.mixture_homophilic_share),
                ],
            };
            let accuracies = cfg
                .seeds
                .par_iter()
                .map(|&seed| {
                    let cell_seed = derive_seed(seed, &format!("d2/{row}/{col}"));
                    let mut spec = CsbmSpec::new(cfg.num_nodes, means.clone(), subgroups.clone()).with_seed(cell_seed);
                    spec.equal_degree = false;
                    let all: Vec<usize> = (0..cfg.num_nodes).collect();
                    let g = generate(&spec)?.with_masks(Masks::new(all, vec![], vec![]))?;
                    let train_cfg = TrainConfig {
                        seed: cell_seed,
                        ..cfg.train.clone()
                    };
                    let model = train(&g, &train_cfg)?;
                    let opts = EvalOptions {
                        disparity_bins: 0,
                        ..EvalOptions::default()
                    };
                    Ok(100.0 * evaluate_with(&model, &g, &opts)?.accuracy)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(D2Cell {
                row,
                col,
                mean: mean(&accuracies),
                std: std_dev(&accuracies),
                accuracies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut row_labels = vec!["none".to_string()];
    row_labels.extend(cfg.heterophilic.iter().copied().map(rate_label));
    let mut col_labels = vec!["none".to_string()];
    col_labels.extend(cfg.homophilic.iter().copied().map(rate_label));
    Ok(D2Table {
        row_labels,
        col_labels,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub p: f64,
    pub q: f64,
    pub q_other: Option<f64>,
    pub analytic: f64,
    pub empirical: f64,
    pub raw_error: f64,
}

/// Degree at which the Monte-Carlo error of the midpoint classifier on
/// aggregated features (covariance `I/d`) falls to the raw-feature error.
///
/// Within a pattern the two classes come from `(p, q)`; across patterns
/// class 1 comes from `(p, q)` and class 2 from `(p', q_other)` with
/// `p' = p + q − q_other`. One set of standard normal draws is shared by
/// every degree, so the estimated error is monotone in the degree and the
/// crossover is found by bisection on a log scale.
pub fn separability_crossover(p: f64, q: f64, q_other: Option<f64>, rho: f64, samples: usize, seed: u64) -> Result<Crossover> {
    let analytic = separability_threshold(p, q, q_other)?;
    let dim = 1;
    let mk = |rates: Vec<SubgroupRates>| {
        let mut s = CsbmSpec::new(2, ClassMeans::Separation { rho, dim }, rates);
        s.variance_scale = VarianceScale::Degree;
        s
    };
    let (spec, class2_subgroup) = match q_other {
        None => (mk(vec![SubgroupRates::new(p, q, 1.0)]), 0),
        Some(qo) => {
            let p2 = p + q - qo;
            if !(0.0..=1.0).contains(&p2) {
                return Err(Error::invalid("cross pattern rate p + q − q_other outside [0,1]"));
            }
            (mk(vec![SubgroupRates::new(p, q, 0.5), SubgroupRates::new(p2, qo, 0.5)]), 1)
        }
    };
    let m1 = spec.aggregated_mean(0, 0)?[0];
    let m2 = spec.aggregated_mean(1, class2_subgroup)?[0];
    let boundary = (m1 + m2) / 2.0;
    let sign = if m1 >= m2 { 1.0 } else { -1.0 };

    // Unit-variance draws; aggregated samples are mean + z/√d.
    let mut rng = substream(seed, "crossover");
    let unit = mk(vec![SubgroupRates::new(0.5, 0.5, 1.0)]);
    let z1 = sample_aggregated(&unit, 0, 0, 1.0, samples, &mut rng)?.into_vec();
    let z2 = sample_aggregated(&unit, 0, 0, 1.0, samples, &mut rng)?.into_vec();
    let raw = mk(vec![SubgroupRates::new(1.0, 0.0, 1.0)]);
    let r1 = sample_aggregated(&raw, 0, 0, 1.0, samples, &mut rng)?.into_vec();
    let r2 = sample_aggregated(&raw, 1, 0, 1.0, samples, &mut rng)?.into_vec();

    let raw_error = (r1.iter().filter(|&&x| x < 0.0).count() + r2.iter().filter(|&&x| x >= 0.0).count()) as f64
        / (2 * samples) as f64;
    let agg_error = |d: f64| {
        let s = d.sqrt().recip();
        let wrong1 = z1.iter().filter(|&&z| sign * (m1 + s * z - boundary) < 0.0).count();
        let wrong2 = z2.iter().filter(|&&z| sign * (m2 + s * z - boundary) >= 0.0).count();
        (wrong1 + wrong2) as f64 / (2 * samples) as f64
    };

    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    if agg_error(lo) <= raw_error {
        return Ok(Crossover { p, q, q_other, analytic, empirical: 1.0, raw_error });
    }
    while agg_error(hi) > raw_error {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::invalid("no crossover below degree 1e12"));
        }
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if agg_error(mid) > raw_error {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Crossover {
        p,
        q,
        q_other,
        analytic,
        empirical: (lo * hi).sqrt(),
        raw_error,
    })
}
