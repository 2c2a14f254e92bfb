mod common;

use common::{dense_aggregate, exact_shell, random_graph, random_permutation};
use gsd_core::aggregate::{aggregate_matrix, AggregationMode};
use gsd_core::homophily::{hop_shells, node_homophily};
use gsd_core::Matrix;
use proptest::prelude::*;

fn mode_strategy() -> impl Strategy<Value = AggregationMode> {
    prop_oneof![Just(AggregationMode::PlainMean), Just(AggregationMode::SelfLoop)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn homophily_lies_in_unit_interval(n in 3usize..40, p in 0.0f64..0.6, classes in 2usize..4, k in 1usize..4, seed in any::<u64>()) {
        let g = random_graph(n, p, classes, 1, seed);
        let h = node_homophily(&g, k).unwrap();
        for x in h.per_node.iter().flatten() {
            prop_assert!((0.0..=1.0).contains(x));
        }
        if let Some(x) = h.graph {
            prop_assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn one_hop_ratio_times_degree_is_integral(n in 3usize..40, p in 0.05f64..0.6, seed in any::<u64>()) {
        let g = random_graph(n, p, 3, 1, seed);
        let h = node_homophily(&g, 1).unwrap();
        for i in 0..n {
            match h.per_node[i] {
                Some(x) => {
                    let count = x * g.degree(i) as f64;
                    prop_assert!((count - count.round()).abs() < 1e-9);
                }
                None => prop_assert_eq!(g.degree(i), 0),
            }
        }
    }

    #[test]
    fn shells_are_disjoint_and_start_with_the_adjacency(n in 2usize..30, p in 0.0f64..0.5, seed in any::<u64>()) {
        let g = random_graph(n, p, 2, 1, seed);
        for v in 0..n {
            let shells = hop_shells(&g, v, 4);
            prop_assert_eq!(&shells[0][..], g.neighbors(v));
            for (k, shell) in shells.iter().enumerate() {
                prop_assert_eq!(shell, &exact_shell(&g, v, k + 1));
                for other in &shells[k + 1..] {
                    prop_assert!(shell.iter().all(|x| !other.contains(x)));
                }
            }
        }
    }

    #[test]
    fn aggregation_is_linear(n in 2usize..30, p in 0.0f64..0.5, k in 0usize..4, mode in mode_strategy(),
                             alpha in -3.0f64..3.0, beta in -3.0f64..3.0, seed in any::<u64>()) {
        let g = random_graph(n, p, 2, 3, seed);
        let x = g.features().clone();
        let z = random_graph(n, 0.0, 2, 3, seed ^ 0x5555).features().clone();
        let mut combo = Matrix::zeros(n, 3);
        for ((c, a), b) in combo.as_mut_slice().iter_mut().zip(x.as_slice()).zip(z.as_slice()) {
            *c = alpha * a + beta * b;
        }
        let lhs = aggregate_matrix(&g, &combo, k, mode);
        let ax = aggregate_matrix(&g, &x, k, mode);
        let az = aggregate_matrix(&g, &z, k, mode);
        for ((l, a), b) in lhs.as_slice().iter().zip(ax.as_slice()).zip(az.as_slice()) {
            prop_assert!((l - (alpha * a + beta * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregation_preserves_constant_rows(n in 2usize..30, p in 0.0f64..0.5, k in 1usize..4, mode in mode_strategy(), seed in any::<u64>()) {
        let g = random_graph(n, p, 2, 2, seed);
        let ones = Matrix::from_vec(n, 2, vec![1.0; 2 * n]).unwrap();
        let out = aggregate_matrix(&g, &ones, k, mode);
        for i in 0..n {
            if mode == AggregationMode::SelfLoop || g.degree(i) > 0 {
                for &x in out.row(i) {
                    prop_assert!((x - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn aggregation_matches_dense_power(n in 2usize..25, p in 0.0f64..0.5, k in 0usize..4, mode in mode_strategy(), seed in any::<u64>()) {
        let g = random_graph(n, p, 2, 3, seed);
        let fast = aggregate_matrix(&g, g.features(), k, mode);
        let slow = dense_aggregate(&g, k, mode);
        for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn homophily_follows_node_relabeling(n in 2usize..30, p in 0.0f64..0.5, k in 1usize..3, seed in any::<u64>()) {
        let g = random_graph(n, p, 3, 1, seed);
        let perm = random_permutation(n, seed.wrapping_add(1));
        let h = node_homophily(&g, k).unwrap();
        let hp = node_homophily(&g.permuted(&perm).unwrap(), k).unwrap();
        for i in 0..n {
            prop_assert_eq!(h.per_node[i], hp.per_node[perm[i]]);
        }
    }
}
