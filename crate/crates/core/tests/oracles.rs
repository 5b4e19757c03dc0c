//! Small hand-checkable cases with independently computed expected values.

use std::collections::HashSet;

use sgur::cluster::{align_to_clusters, kmeans, nearest_centroid, KMeansParams};
use sgur::corpus::{InteractionGraph, ModalityFeatures};
use sgur::eval::{ndcg_at_k, recall_at_k, split_cold_start, split_random, RankingMetrics, RunMetrics, Metric};
use sgur::init::{aggregate, fuse, init_modality, init_users, InitConfig, WeightingStrategy, ZeroDegreeFallback};
use sgur::synth::random_graph;
use sgur::Matrix;

fn close(a: &[f32], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (*x as f64 - y).abs() <= tol)
}

// user 0: items 0, 1; user 1: item 1; user 2: items 1, 2
fn triangle() -> (InteractionGraph, Matrix) {
    let g = InteractionGraph::from_edges(3, 3, &[(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)]).unwrap();
    let items = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 6.0], vec![1.0, 1.0]]).unwrap();
    (g, items)
}

#[test]
fn item_degree_weights_by_hand() {
    let (g, items) = triangle();
    let m = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::Zeros).unwrap();
    // item degrees: 1, 3, 1
    assert!(close(m.row(0), &[3.0, 2.0], 1e-6));
    assert!(close(m.row(1), &[0.0, 2.0], 1e-6));
    assert!(close(m.row(2), &[1.0, 3.0], 1e-6));
}

#[test]
fn bi_degree_and_equal_weights_by_hand() {
    let (g, items) = triangle();
    let bi = aggregate(&g, &items, WeightingStrategy::BiDegree, ZeroDegreeFallback::Zeros).unwrap();
    let s2 = 2f64.sqrt();
    let s6 = 6f64.sqrt();
    let s3 = 3f64.sqrt();
    assert!(close(bi.row(0), &[3.0 / s2, 6.0 / s6], 1e-6));
    assert!(close(bi.row(1), &[0.0, 6.0 / s3], 1e-6));
    assert!(close(bi.row(2), &[1.0 / s2, 6.0 / s6 + 1.0 / s2], 1e-6));

    let eq = aggregate(&g, &items, WeightingStrategy::Equal, ZeroDegreeFallback::Zeros).unwrap();
    assert!(close(eq.row(0), &[1.5, 3.0], 1e-6));
    assert!(close(eq.row(1), &[0.0, 6.0], 1e-6));
    assert!(close(eq.row(2), &[0.5, 3.5], 1e-6));
}

#[test]
fn isolated_user_fallbacks() {
    // user 2 is isolated; item 2 has no interactions and stays out of the mean
    let g = InteractionGraph::from_edges(3, 3, &[(0, 0), (0, 1), (1, 1)]).unwrap();
    let items = Matrix::from_rows(&[vec![2.0, 4.0], vec![0.0, 2.0], vec![100.0, 100.0]]).unwrap();
    let zeros = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::Zeros).unwrap();
    assert_eq!(zeros.row(2), &[0.0, 0.0]);
    let mean = aggregate(&g, &items, WeightingStrategy::ItemDegree, ZeroDegreeFallback::GlobalMean).unwrap();
    // (e_0 / 1 + e_1 / 2) / 2
    assert!(close(mean.row(2), &[1.0, 2.5], 1e-6));
    assert!(close(mean.row(0), &[2.0, 5.0], 1e-6));
}

fn blobs() -> ModalityFeatures {
    // two tight groups, far apart: {0,1,2,3} near (0,0), {4,5,6,7} near (10,10)
    let rows = vec![
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 1.0],
        vec![10.0, 10.0],
        vec![11.0, 10.0],
        vec![10.0, 11.0],
        vec![11.0, 11.0],
    ];
    ModalityFeatures::new("v", Matrix::from_rows(&rows).unwrap()).unwrap()
}

#[test]
fn two_blobs_are_recovered_for_every_seed() {
    let f = blobs();
    for seed in 0..20 {
        let model = kmeans(&f, &KMeansParams::new(2, seed)).unwrap();
        let a = &model.assignments;
        assert!(a[..4].iter().all(|&c| c == a[0]) && a[4..].iter().all(|&c| c == a[4]));
        assert_ne!(a[0], a[4]);
        let low = model.centroids.row(a[0]);
        let high = model.centroids.row(a[4]);
        assert_eq!(low, &[0.5, 0.5]);
        assert_eq!(high, &[10.5, 10.5]);
        assert!((model.objective - 4.0).abs() < 1e-9, "each point sits 0.5 from its mean in both axes");
    }
}

#[test]
fn kmeans_assignments_are_brute_force_argmin() {
    let f = ModalityFeatures::new("v", sgur::synth::unit_sphere(120, 5, 9)).unwrap();
    let model = kmeans(&f, &KMeansParams::new(7, 4)).unwrap();
    for (i, row) in f.matrix().iter_rows().enumerate() {
        let mut best = (usize::MAX, f64::INFINITY);
        for c in 0..model.k {
            let d: f64 = row
                .iter()
                .zip(model.centroids.row(c))
                .map(|(a, b)| (*a as f64 - *b as f64).powi(2))
                .sum();
            if d < best.1 {
                best = (c, d);
            }
        }
        assert_eq!(model.assignments[i], best.0);
        assert_eq!(nearest_centroid(row, &model.centroids).0, best.0);
    }
}

#[test]
fn alignment_replaces_rows_with_centroids() {
    let f = blobs();
    let model = kmeans(&f, &KMeansParams::new(2, 1)).unwrap();
    let aligned = align_to_clusters(&f, &model).unwrap();
    for i in 0..8 {
        let want: &[f32] = if i < 4 { &[0.5, 0.5] } else { &[10.5, 10.5] };
        assert_eq!(aligned.matrix().row(i), want);
    }
}

#[test]
fn end_to_end_toy_init() {
    // 5 users x 8 items, blob features, K = 2, lambda = 0.1
    let edges = [
        (0, 0),
        (0, 4),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 5),
        (2, 6),
        (3, 0),
        (3, 7),
        (4, 3),
        (4, 4),
        (4, 5),
    ];
    let g = InteractionGraph::from_edges(5, 8, &edges).unwrap();
    let f = blobs();
    let config = InitConfig {
        default_k: 2,
        lambda: 0.1,
        ..InitConfig::default()
    };

    let item_deg = g.item_degrees();
    let centroid = |i: usize| if i < 4 { [0.5, 0.5] } else { [10.5, 10.5] };
    let mut expected = vec![[0.0f64; 2]; 5];
    for (u, want) in expected.iter_mut().enumerate() {
        let mut item_level = [0.0; 2];
        let mut cluster_level = [0.0; 2];
        for &i in g.user_items(u) {
            let w = 1.0 / item_deg[i] as f64;
            for k in 0..2 {
                item_level[k] += w * f.matrix().row(i)[k] as f64;
                cluster_level[k] += w * centroid(i)[k];
            }
        }
        for k in 0..2 {
            want[k] = 0.9 * item_level[k] + 0.1 * cluster_level[k];
        }
    }

    for seed in [0, 5, 11] {
        let out = init_users(&g, std::slice::from_ref(&f), &config, seed).unwrap();
        let m = out.get("v").unwrap();
        for u in 0..5 {
            assert!(close(m.row(u), &expected[u], 1e-6), "user {u}: {:?} vs {:?}", m.row(u), expected[u]);
        }
    }

    let parts = init_modality(&g, &f, &config, 0).unwrap();
    let again = fuse(&parts.item_level, parts.cluster_level.as_ref().unwrap(), 0.1).unwrap();
    assert!(again.bitwise_eq(&parts.fused));
}

#[test]
fn metrics_by_hand() {
    let ranked = [4, 1, 7, 2, 9];
    let rel: HashSet<usize> = [1, 9, 3].into();
    assert_eq!(recall_at_k(&ranked, &rel, 1), Some(0.0));
    assert_eq!(recall_at_k(&ranked, &rel, 2), Some(1.0 / 3.0));
    assert_eq!(recall_at_k(&ranked, &rel, 5), Some(2.0 / 3.0));
    assert_eq!(recall_at_k(&ranked, &HashSet::new(), 5), None);
    assert!(ndcg_at_k(&[4, 7], &rel, 2).unwrap().is_sign_positive(), "a miss is +0.0");

    let dcg = 1.0 / 3f64.log2() + 1.0 / 6f64.log2();
    let idcg = 1.0 + 1.0 / 3f64.log2() + 0.5;
    assert!((ndcg_at_k(&ranked, &rel, 5).unwrap() - dcg / idcg).abs() < 1e-12);
    assert_eq!(ndcg_at_k(&[3, 1, 9], &rel, 3), Some(1.0));
    assert_eq!(ndcg_at_k(&[3, 1, 9], &rel, 10).map(|x| (x * 1e12).round()), Some(1e12));
}

#[test]
fn ranking_summary_mean_and_sample_std() {
    let run = |r: f64| {
        let mut m = RunMetrics::default();
        m.recall.insert(10, r);
        m.ndcg.insert(10, r / 2.0);
        m
    };
    let s = RankingMetrics::new(vec![run(0.1), run(0.2), run(0.3)]);
    assert!((s.mean(Metric::Recall, 10).unwrap() - 0.2).abs() < 1e-12);
    assert!((s.std(Metric::Recall, 10).unwrap() - 0.1).abs() < 1e-12);
    assert!(s.to_csv().starts_with("metric,K,mean,std,seed_count\n"));
}

#[test]
fn random_split_set_algebra() {
    let g = random_graph(80, 60, 1, 20, 3);
    let split = split_random(&g, (0.8, 0.1, 0.1), 3).unwrap();
    let all: HashSet<(usize, usize)> = g.edges().collect();
    let parts: Vec<HashSet<(usize, usize)>> = [&split.train, &split.val, &split.test]
        .iter()
        .map(|p| p.iter().copied().collect())
        .collect();
    assert!(parts[0].is_disjoint(&parts[1]) && parts[0].is_disjoint(&parts[2]) && parts[1].is_disjoint(&parts[2]));
    let union: HashSet<_> = parts.iter().flatten().copied().collect();
    assert_eq!(union, all);
    for u in 0..80 {
        assert!(split.train.iter().any(|e| e.0 == u), "user {u} lost all training edges");
    }
    let frac = split.train.len() as f64 / all.len() as f64;
    assert!((0.75..0.9).contains(&frac), "train fraction {frac}");
}

#[test]
fn cold_split_set_algebra() {
    let g = random_graph(100, 50, 2, 15, 4);
    let split = split_cold_start(&g, 0.2, 4).unwrap();
    assert_eq!(split.cold_items.len(), 10);
    let cold: HashSet<usize> = split.cold_items.iter().copied().collect();
    assert!(split.train.iter().all(|e| !cold.contains(&e.1)));
    assert!(split.val.iter().chain(&split.test).all(|e| cold.contains(&e.1)));
    assert_eq!(split.train.len() + split.val.len() + split.test.len(), g.num_edges());
    split.check_invariants().unwrap();
}
