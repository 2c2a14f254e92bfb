//! Structural disparity diagnostics.
//!
//! Everything here compares test nodes against the training set, either
//! through the nearest training node in aggregated-feature space
//! ([`disparity`], [`hopgap`]), class prototypes ([`prototype`]), nearest
//! neighbor votes ([`agreement`]) or a kernel two-sample distance ([`mmd`]).

pub mod agreement;
pub mod disparity;
pub mod hopgap;
pub mod mmd;
pub mod prototype;

pub use agreement::{local_agreement, AgreementReport};
pub use disparity::{disparity_scores, partition_bins, BinSummary, DisparityEntry, DisparityReport, ScoreVariant};
pub use hopgap::{hop_homophily_gap, HopGap};
pub use mmd::{mmd, DEFAULT_SIGMAS};
pub use prototype::{discriminative_ratio, prototypes, ClassPrototype, PrototypeSet, RatioReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homophily::HomophilyProfile;
use crate::matrix::{sq_dist, Matrix};

/// Which side of the threshold counts as the majority pattern.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MajoritySide {
    /// Homophilic when the graph-level ratio exceeds 0.5.
    #[default]
    Auto,
    Homophilic,
    Heterophilic,
}

impl std::str::FromStr for MajoritySide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MajoritySide::Auto),
            "homo" | "homophilic" => Ok(MajoritySide::Homophilic),
            "hetero" | "heterophilic" => Ok(MajoritySide::Heterophilic),
            other => Err(Error::invalid(format!("unknown majority side `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorityRule {
    pub threshold: f64,
    #[serde(default)]
    pub side: MajoritySide,
}

impl Default for MajorityRule {
    fn default() -> Self {
        MajorityRule {
            threshold: 0.5,
            side: MajoritySide::Auto,
        }
    }
}

/// Nodes split by structural pattern. Nodes with an undefined ratio are in
/// neither list.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub majority: Vec<usize>,
    pub minority: Vec<usize>,
    pub homophilic_majority: bool,
}

impl MajorityRule {
    pub fn with_threshold(threshold: f64) -> Self {
        MajorityRule {
            threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid(format!("majority threshold {} outside (0,1)", self.threshold)));
        }
        Ok(())
    }

    pub fn homophilic_majority(&self, profile: &HomophilyProfile) -> bool {
        match self.side {
            MajoritySide::Homophilic => true,
            MajoritySide::Heterophilic => false,
            MajoritySide::Auto => profile.graph.is_some_and(|h| h > 0.5),
        }
    }

    /// Classify `nodes` (kept in the given order) into majority and minority.
    pub fn assign(&self, profile: &HomophilyProfile, nodes: &[usize]) -> Result<RoleAssignment> {
        self.validate()?;
        let homo = self.homophilic_majority(profile);
        let mut out = RoleAssignment {
            homophilic_majority: homo,
            ..Default::default()
        };
        for &i in nodes {
            if let Some(h) = profile.per_node[i] {
                if (h > self.threshold) == homo {
                    out.majority.push(i);
                } else {
                    out.minority.push(i);
                }
            }
        }
        Ok(out)
    }
}

/// Nearest row among `candidates` (ascending node ids) to `query`, as
/// `(node, distance)`. Ties go to the lowest node id.
pub fn nearest(features: &Matrix, candidates: &[usize], query: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &c in candidates {
        let d = sq_dist(features.row(c), query);
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((c, d));
        }
    }
    best.map(|(c, d)| (c, d.sqrt()))
}

/// The `k` nearest candidates ordered by (distance, node id).
pub fn k_nearest(features: &Matrix, candidates: &[usize], query: &[f64], k: usize) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&c| (c, sq_dist(features.row(c), query)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    all.truncate(k);
    all.into_iter().map(|(c, d)| (c, d.sqrt())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(vals: Vec<Option<f64>>) -> HomophilyProfile {
        let defined: Vec<f64> = vals.iter().flatten().copied().collect();
        HomophilyProfile {
            hop: 1,
            graph: Some(defined.iter().sum::<f64>() / defined.len() as f64),
            per_node: vals,
        }
    }

    #[test]
    fn auto_side_follows_graph_ratio() {
        let p = profile(vec![Some(0.9), Some(0.8), Some(0.1), None]);
        let r = MajorityRule::default().assign(&p, &[0, 1, 2, 3]).unwrap();
        assert!(r.homophilic_majority);
        assert_eq!(r.majority, vec![0, 1]);
        assert_eq!(r.minority, vec![2]);

        let p = profile(vec![Some(0.1), Some(0.5), Some(0.9)]);
        let r = MajorityRule::default().assign(&p, &[0, 1, 2]).unwrap();
        assert!(!r.homophilic_majority);
        assert_eq!(r.majority, vec![0, 1]);
        assert_eq!(r.minority, vec![2]);
    }

    #[test]
    fn threshold_must_be_interior() {
        let p = profile(vec![Some(0.5)]);
        assert!(MajorityRule::with_threshold(1.0).assign(&p, &[0]).is_err());
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let m = Matrix::from_rows(&[vec![1.0], vec![-1.0], vec![1.0]]).unwrap();
        assert_eq!(nearest(&m, &[0, 1, 2], &[0.0]), Some((0, 1.0)));
        let k = k_nearest(&m, &[2, 1, 0], &[0.0], 2);
        assert_eq!(k, vec![(0, 1.0), (1, 1.0)]);
    }
}
