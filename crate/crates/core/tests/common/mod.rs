#![allow(dead_code)]

use gsd_core::aggregate::AggregationMode;
use gsd_core::{GraphBundle, Masks, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Erdős–Rényi graph with uniform labels and standard normal features.
pub fn random_graph(n: usize, p: f64, classes: usize, dim: usize, seed: u64) -> GraphBundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| if i < classes { i } else { rng.random_range(0..classes) }).collect();
    let data: Vec<f64> = (0..n * dim).map(|_| rng.sample(StandardNormal)).collect();
    GraphBundle::new("random", classes, edges, Matrix::from_vec(n, dim, data).unwrap(), labels).unwrap()
}

/// Shuffled 50/20/30 masks.
pub fn with_split(g: GraphBundle, seed: u64) -> GraphBundle {
    use rand::seq::SliceRandom;
    let n = g.num_nodes();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let a = n / 2;
    let b = a + n / 5;
    g.with_masks(Masks::new(idx[..a].to_vec(), idx[a..b].to_vec(), idx[b..].to_vec())).unwrap()
}

/// Dense transition matrix of the chosen operator, raised to `k` and applied
/// to the features by plain triple loops.
pub fn dense_aggregate(g: &GraphBundle, k: usize, mode: AggregationMode) -> Matrix {
    let n = g.num_nodes();
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        let loop_weight = usize::from(mode == AggregationMode::SelfLoop);
        let deg = g.degree(i) + loop_weight;
        if deg == 0 {
            continue;
        }
        for &j in g.neighbors(i) {
            t[i][j] = 1.0 / deg as f64;
        }
        if loop_weight == 1 {
            t[i][i] = 1.0 / deg as f64;
        }
    }
    let mut x: Vec<Vec<f64>> = g.features().row_iter().map(<[f64]>::to_vec).collect();
    for _ in 0..k {
        let mut next = vec![vec![0.0; g.feature_dim()]; n];
        for i in 0..n {
            for j in 0..n {
                if t[i][j] != 0.0 {
                    for c in 0..g.feature_dim() {
                        next[i][c] += t[i][j] * x[j][c];
                    }
                }
            }
        }
        x = next;
    }
    Matrix::from_rows(&x).unwrap()
}

/// Nodes at shortest-path distance exactly `k` by Floyd–Warshall.
pub fn exact_shell(g: &GraphBundle, v: usize, k: usize) -> Vec<usize> {
    let n = g.num_nodes();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for &j in g.neighbors(i) {
            d[i][j] = 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][m] + d[m][j] < d[i][j] {
                    d[i][j] = d[i][m] + d[m][j];
                }
            }
        }
    }
    (0..n).filter(|&j| d[v][j] == k).collect()
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}
