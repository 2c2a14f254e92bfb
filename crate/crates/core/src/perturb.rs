//! Targeted synthetic edge addition.
//!
//! Edges are only ever placed between two targeted nodes, so every other
//! node keeps its neighborhood and therefore its homophily ratio. In
//! homophilic mode both endpoints share a label; in heterophilous mode the
//! partner's label is drawn from a per-class distribution `D_c` that puts no
//! mass on `c`.

use std::collections::HashSet;

use rand::Rng;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::homophily::node_homophily;
use crate::rng::substream;

/// Consecutive rejected proposals tolerated before giving up.
pub const REJECTION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbMode {
    Homophilic,
    Heterophilous,
}

impl std::str::FromStr for PerturbMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homo" | "homophilic" => Ok(PerturbMode::Homophilic),
            "hetero" | "heterophilous" | "heterophilic" => Ok(PerturbMode::Heterophilous),
            other => Err(Error::invalid(format!("unknown perturbation mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbPlan {
    pub targets: Vec<usize>,
    pub budget: usize,
    pub mode: PerturbMode,
    /// Row `c` is the partner-label distribution for a node of class `c`.
    /// Defaults to [`circulant_distribution`] in heterophilous mode.
    #[serde(default)]
    pub target_dist: Option<Vec<Vec<f64>>>,
    pub seed: u64,
}

/// Mass 1/2 on classes `c−1` and `c+1` (mod K); for K = 2 all mass goes to
/// the other class.
pub fn circulant_distribution(k: usize) -> Result<Vec<Vec<f64>>> {
    if k < 2 {
        return Err(Error::invalid("heterophilous edges need at least two classes"));
    }
    Ok((0..k)
        .map(|c| {
            let mut row = vec![0.0; k];
            row[(c + k - 1) % k] += 0.5;
            row[(c + 1) % k] += 0.5;
            row
        })
        .collect())
}

impl PerturbPlan {
    pub fn new(targets: Vec<usize>, budget: usize, mode: PerturbMode, seed: u64) -> Self {
        PerturbPlan {
            targets,
            budget,
            mode,
            target_dist: None,
            seed,
        }
    }

    fn resolved_distribution(&self, k: usize) -> Result<Vec<Vec<f64>>> {
        let dist = match &self.target_dist {
            Some(d) => d.clone(),
            None => circulant_distribution(k)?,
        };
        if dist.len() != k {
            return Err(Error::invalid(format!("target distribution has {} rows, expected {k}", dist.len())));
        }
        for (c, row) in dist.iter().enumerate() {
            if row.len() != k {
                return Err(Error::invalid(format!("target distribution row {c} has wrong length")));
            }
            if row.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
                return Err(Error::invalid(format!("target distribution row {c} has invalid weights")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!("target distribution row {c} does not sum to 1")));
            }
            if row[c] != 0.0 {
                return Err(Error::invalid(format!("target distribution row {c} puts mass on its own class")));
            }
        }
        Ok(dist)
    }

    pub fn validate(&self, g: &GraphBundle) -> Result<()> {
        let n = g.num_nodes();
        let mut seen = HashSet::new();
        for &t in &self.targets {
            if t >= n {
                return Err(Error::OutOfRange {
                    what: "target node",
                    index: t,
                    bound: n,
                });
            }
            if !seen.insert(t) {
                return Err(Error::invalid(format!("target node {t} listed twice")));
            }
        }
        if self.mode == PerturbMode::Heterophilous {
            self.resolved_distribution(g.num_classes())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub graph: GraphBundle,
    /// Added edges in placement order, each as `(min, max)`.
    pub trace: Vec<(usize, usize)>,
}

/// Place `budget` new edges among the targets.
pub fn add_edges(g: &GraphBundle, plan: &PerturbPlan) -> Result<Perturbed> {
    let trace = draw_trace(g, plan, plan.budget)?;
    let graph = g.with_added_edges(&trace)?;
    Ok(Perturbed { graph, trace })
}

fn draw_trace(g: &GraphBundle, plan: &PerturbPlan, budget: usize) -> Result<Vec<(usize, usize)>> {
    plan.validate(g)?;
    if budget == 0 {
        return Ok(Vec::new());
    }
    let k = g.num_classes();
    let labels = g.labels();
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &t in &plan.targets {
        by_label[labels[t]].push(t);
    }
    if plan.targets.is_empty() {
        return Err(Error::Saturated {
            placed: 0,
            budget,
            limit: REJECTION_LIMIT,
        });
    }
    let samplers: Option<Vec<WeightedIndex<f64>>> = match plan.mode {
        PerturbMode::Homophilic => None,
        PerturbMode::Heterophilous => Some(
            plan.resolved_distribution(k)?
                .into_iter()
                .map(|row| WeightedIndex::new(row).map_err(|e| Error::invalid(e.to_string())))
                .collect::<Result<_>>()?,
        ),
    };

    let mut rng = substream(plan.seed, "perturb");
    let mut present = g.edge_set();
    let mut trace = Vec::with_capacity(budget);
    let mut rejections = 0usize;
    while trace.len() < budget {
        let i = plan.targets[rng.random_range(0..plan.targets.len())];
        let class = match &samplers {
            None => labels[i],
            Some(s) => s[labels[i]].sample(&mut rng),
        };
        let pool = &by_label[class];
        let accepted = if pool.is_empty() {
            None
        } else {
            let j = pool[rng.random_range(0..pool.len())];
            let e = (i.min(j), i.max(j));
            (i != j && !present.contains(&e)).then_some(e)
        };
        match accepted {
            Some(e) => {
                present.insert(e);
                trace.push(e);
                rejections = 0;
            }
            None => {
                rejections += 1;
                if rejections >= REJECTION_LIMIT {
                    return Err(Error::Saturated {
                        placed: trace.len(),
                        budget,
                        limit: REJECTION_LIMIT,
                    });
                }
            }
        }
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub budget: usize,
    pub graph: GraphBundle,
    /// Mean 1-hop homophily over targets with at least one neighbor.
    pub h_targeted: Option<f64>,
}

/// Graphs at each checkpoint budget along one edge trajectory. The graph
/// at a smaller budget is always a subgraph of the one at a larger budget.
pub fn sweep(g: &GraphBundle, plan: &PerturbPlan, checkpoints: &[usize]) -> Result<Vec<SweepPoint>> {
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("checkpoints must be ascending"));
    }
    let max = checkpoints.last().copied().unwrap_or(0);
    let trace = draw_trace(g, plan, max)?;
    checkpoints
        .iter()
        .map(|&budget| {
            let graph = g.with_added_edges(&trace[..budget])?;
            let h_targeted = targeted_homophily(&graph, &plan.targets)?;
            Ok(SweepPoint {
                budget,
                graph,
                h_targeted,
            })
        })
        .collect()
}

pub fn targeted_homophily(g: &GraphBundle, targets: &[usize]) -> Result<Option<f64>> {
    Ok(node_homophily(g, 1)?.mean_over(targets))
}
