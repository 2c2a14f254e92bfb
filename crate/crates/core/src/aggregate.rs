//! Mean feature aggregation over the sparse edge list.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::GraphBundle;
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AggregationMode {
    /// `D⁻¹A`; nodes without neighbors get a zero row.
    PlainMean,
    /// `D̃⁻¹Ã` with `Ã = A + I`.
    SelfLoop,
}

impl std::str::FromStr for AggregationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" | "plain-mean" => Ok(AggregationMode::PlainMean),
            "self-loop" | "selfloop" | "self-loop-normalized" => Ok(AggregationMode::SelfLoop),
            other => Err(format!("unknown aggregation mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedFeatures {
    pub hop: usize,
    pub mode: AggregationMode,
    pub features: Matrix,
}

/// `k` applications of the chosen operator to the bundle's features.
pub fn aggregate(g: &GraphBundle, k: usize, mode: AggregationMode) -> AggregatedFeatures {
    AggregatedFeatures {
        hop: k,
        mode,
        features: aggregate_matrix(g, g.features(), k, mode),
    }
}

/// Same as [`aggregate`] on an arbitrary `n × d` matrix.
pub fn aggregate_matrix(g: &GraphBundle, x: &Matrix, k: usize, mode: AggregationMode) -> Matrix {
    assert_eq!(x.rows(), g.num_nodes(), "feature rows must match node count");
    let mut cur = x.clone();
    for _ in 0..k {
        cur = propagate_once(g, &cur, mode);
    }
    cur
}

fn propagate_once(g: &GraphBundle, x: &Matrix, mode: AggregationMode) -> Matrix {
    let d = x.cols();
    let mut out = Matrix::zeros(x.rows(), d);
    out.as_mut_slice()
        .par_chunks_mut(d.max(1))
        .enumerate()
        .for_each(|(i, row)| {
            let nb = g.neighbors(i);
            let denom = match mode {
                AggregationMode::PlainMean => {
                    if nb.is_empty() {
                        return;
                    }
                    nb.len() as f64
                }
                AggregationMode::SelfLoop => {
                    row.copy_from_slice(x.row(i));
                    nb.len() as f64 + 1.0
                }
            };
            for &j in nb {
                for (r, v) in row.iter_mut().zip(x.row(j)) {
                    *r += v;
                }
            }
            row.iter_mut().for_each(|r| *r /= denom);
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_graph() -> GraphBundle {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -4.0], vec![5.0, 6.0]]).unwrap();
        GraphBundle::new("e", 1, vec![(0, 1)], x, vec![0; 3]).unwrap()
    }

    #[test]
    fn single_edge_plain_mean_swaps_rows() {
        let g = edge_graph();
        let f = aggregate(&g, 1, AggregationMode::PlainMean).features;
        assert_eq!(f.row(0), &[3.0, -4.0]);
        assert_eq!(f.row(1), &[1.0, 2.0]);
        assert_eq!(f.row(2), &[0.0, 0.0]);
    }

    #[test]
    fn single_edge_self_loop_averages() {
        let g = edge_graph();
        let f = aggregate(&g, 1, AggregationMode::SelfLoop).features;
        assert_eq!(f.row(0), &[2.0, -1.0]);
        assert_eq!(f.row(1), &[2.0, -1.0]);
        assert_eq!(f.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn zero_hops_is_identity() {
        let g = edge_graph();
        assert_eq!(&aggregate(&g, 0, AggregationMode::SelfLoop).features, g.features());
    }
}
