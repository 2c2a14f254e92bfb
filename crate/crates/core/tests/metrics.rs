mod common;

use common::{dense_aggregate, exact_shell, random_graph, random_permutation, with_split};
use gsd_core::aggregate::AggregationMode;
use gsd_core::metrics::disparity::partition_bins_by;
use gsd_core::metrics::{
    discriminative_ratio, disparity_scores, hop_homophily_gap, k_nearest, local_agreement, mmd, partition_bins, MajorityRule,
    ScoreVariant,
};
use gsd_core::{node_homophily, Matrix};
use proptest::prelude::*;

fn shell_ratio(g: &gsd_core::GraphBundle, v: usize, k: usize) -> Option<f64> {
    let shell = exact_shell(g, v, k);
    let same = shell.iter().filter(|&&u| g.labels()[u] == g.labels()[v]).count();
    (!shell.is_empty()).then(|| same as f64 / shell.len() as f64)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn disparity_scores_match_all_pairs_oracle() {
    for seed in 0..20 {
        let g = with_split(random_graph(30, 0.12, 2, 3, seed), seed);
        let report = disparity_scores(&g, 2).unwrap();
        let f = dense_aggregate(&g, 2, AggregationMode::SelfLoop);
        let masks = g.masks().unwrap();
        assert_eq!(report.entries.len(), masks.test.len());
        let mut undefined = 0;
        for e in &report.entries {
            let mut best = (usize::MAX, f64::INFINITY);
            for &v in &masks.train {
                let d = dist(f.row(e.node), f.row(v));
                if d < best.1 {
                    best = (v, d);
                }
            }
            assert_eq!(e.nearest, best.0, "seed {seed} node {}", e.node);
            assert!((e.distance - best.1).abs() < 1e-12);
            let gap = match (shell_ratio(&g, e.node, 2), shell_ratio(&g, best.0, 2)) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => {
                    undefined += 1;
                    0.0
                }
            };
            assert!((e.hom_gap - gap).abs() < 1e-12);
            assert_eq!(e.score, e.distance + e.hom_gap);
        }
        assert_eq!(report.undefined_pairs, undefined);
    }
}

#[test]
fn score_variants_share_the_nearest_node() {
    let g = with_split(random_graph(60, 0.1, 2, 4, 7), 7);
    let base = disparity_scores(&g, 2).unwrap();
    for variant in [ScoreVariant::Combined, ScoreVariant::Distance, ScoreVariant::Homophily] {
        let r = partition_bins_by(base.clone(), 5, variant).unwrap();
        for (a, b) in base.entries.iter().zip(&r.entries) {
            assert_eq!(a.nearest, b.nearest);
            let want = match variant {
                ScoreVariant::Combined => a.distance + a.hom_gap,
                ScoreVariant::Distance => a.distance,
                ScoreVariant::Homophily => a.hom_gap,
            };
            assert_eq!(b.value(variant), want);
        }
        let mut bins: Vec<(f64, usize, usize)> = r.entries.iter().map(|e| (e.value(variant), e.node, e.bin.unwrap())).collect();
        bins.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        assert!(bins.windows(2).all(|w| w[0].2 <= w[1].2));
    }
}

#[test]
fn hop_gap_matches_shell_oracle() {
    let g = with_split(random_graph(30, 0.1, 2, 2, 3), 3);
    let test = g.masks().unwrap().test.clone();
    let report = disparity_scores(&g, 2).unwrap();
    let gaps = hop_homophily_gap(&g, &test, 4, 2).unwrap();
    for (k, hg) in (1..=4).zip(&gaps) {
        let pairs: Vec<f64> = report
            .entries
            .iter()
            .filter_map(|e| Some((shell_ratio(&g, e.node, k)? - shell_ratio(&g, e.nearest, k)?).abs()))
            .collect();
        assert_eq!(hg.counted, pairs.len());
        assert_eq!(hg.undefined, test.len() - pairs.len());
        match hg.mean_gap {
            Some(m) => assert!((m - pairs.iter().sum::<f64>() / pairs.len() as f64).abs() < 1e-12),
            None => assert!(pairs.is_empty()),
        }
    }
}

#[test]
fn knn_agrees_with_sorting_all_candidates() {
    let g = random_graph(50, 0.0, 2, 3, 11);
    let x = g.features();
    let candidates: Vec<usize> = (0..50).step_by(2).collect();
    for q in 0..5 {
        let got = k_nearest(x, &candidates, x.row(q), 7);
        let mut all: Vec<(usize, f64)> = candidates.iter().map(|&c| (c, dist(x.row(q), x.row(c)))).collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        assert_eq!(got.iter().map(|p| p.0).collect::<Vec<_>>(), all[..7].iter().map(|p| p.0).collect::<Vec<_>>());
    }
}

#[test]
fn local_agreement_matches_vote_oracle() {
    let g = with_split(random_graph(80, 0.05, 2, 3, 5), 5);
    let r = local_agreement(&g, 1, 5, &[], &[]).unwrap();
    let f = dense_aggregate(&g, 1, AggregationMode::SelfLoop);
    let masks = g.masks().unwrap();
    let mut agree = 0;
    let mut hits = 0;
    for &u in &masks.test {
        let mut all: Vec<(usize, f64)> = masks.train.iter().map(|&v| (v, dist(f.row(u), f.row(v)))).collect();
        all.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let ones = all[..5].iter().filter(|p| g.labels()[p.0] == 1).count();
        let vote = if ones >= 3 { 1 } else { 0 };
        agree += 1;
        hits += usize::from(vote == g.labels()[u]);
    }
    assert_eq!(r.ratio, agree as f64 / masks.test.len() as f64);
    assert_eq!(r.accuracy, Some(hits as f64 / agree as f64));
}

#[test]
fn discriminative_ratio_ignores_node_order() {
    let g = with_split(random_graph(120, 0.06, 2, 4, 2), 2);
    let rule = MajorityRule::default();
    let roles = rule.assign(&node_homophily(&g, 1).unwrap(), &g.eval_nodes()).unwrap();
    let base = discriminative_ratio(&g, 2, &roles.majority, &roles.minority, false).unwrap();
    let perm = random_permutation(120, 9);
    let gp = g.permuted(&perm).unwrap();
    let map = |s: &[usize]| s.iter().map(|&i| perm[i]).collect::<Vec<_>>();
    let moved = discriminative_ratio(&gp, 2, &map(&roles.majority), &map(&roles.minority), false).unwrap();
    assert!((base.ratio - moved.ratio).abs() < 1e-12);
}

fn points(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3.0f64..3.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mmd_is_symmetric(x in points(6, 3), y in points(9, 3)) {
        let sigmas = [0.5, 1.0, 4.0];
        prop_assert!((mmd(&x, &y, &sigmas).unwrap() - mmd(&y, &x, &sigmas).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn mmd_is_scale_free(x in points(5, 2), y in points(7, 2), c in 0.1f64..10.0) {
        let sigmas = [0.5, 1.0, 4.0];
        let scale = |m: &Matrix| {
            let mut s = m.clone();
            s.scale(c);
            s
        };
        let scaled: Vec<f64> = sigmas.iter().map(|s| s * c).collect();
        let a = mmd(&x, &y, &sigmas).unwrap();
        let b = mmd(&scale(&x), &scale(&y), &scaled).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn bins_partition_the_test_nodes(n in 30usize..90, bins in 1usize..8, seed in any::<u64>()) {
        let g = with_split(random_graph(n, 0.1, 2, 2, seed), seed);
        let r = partition_bins(disparity_scores(&g, 2).unwrap(), bins).unwrap();
        let mut counts = vec![0usize; bins];
        for e in &r.entries {
            counts[e.bin.unwrap() - 1] += 1;
        }
        prop_assert_eq!(counts.iter().sum::<usize>(), g.masks().unwrap().test.len());
        prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(counts, r.bins.iter().map(|b| b.count).collect::<Vec<_>>());
    }
}
