//! Recall@K and NDCG@K on hand-made rankings, then aggregated over seeds.

use std::collections::HashSet;

use sgur::eval::{ndcg_at_k, recall_at_k, Metric, RankingMetrics, RunMetrics};

fn main() {
    let relevant: HashSet<usize> = [3, 8].into();
    let rankings = [
        ("perfect", vec![3, 8, 1, 2, 4]),
        ("second and fourth", vec![1, 3, 2, 8, 4]),
        ("miss", vec![1, 2, 4, 5, 6]),
    ];
    for (name, ranked) in &rankings {
        println!(
            "{name:<18} recall@2={:.3} recall@5={:.3} ndcg@2={:.3} ndcg@5={:.3}",
            recall_at_k(ranked, &relevant, 2).unwrap(),
            recall_at_k(ranked, &relevant, 5).unwrap(),
            ndcg_at_k(ranked, &relevant, 2).unwrap(),
            ndcg_at_k(ranked, &relevant, 5).unwrap(),
        );
    }
    // a lone hit at rank 2 scores 1/log2(3)
    println!("single hit at rank 2: {:.6}", ndcg_at_k(&[0, 7], &[7].into(), 10).unwrap());

    let runs = [0.21, 0.24, 0.19]
        .iter()
        .map(|&r| {
            let mut m = RunMetrics::default();
            m.recall.insert(10, r);
            m.ndcg.insert(10, r * 0.6);
            m
        })
        .collect();
    let summary = RankingMetrics::new(runs);
    println!(
        "\nrecall@10 over seeds: {:.4} +- {:.4}",
        summary.mean(Metric::Recall, 10).unwrap(),
        summary.std(Metric::Recall, 10).unwrap()
    );
    print!("{}", summary.to_csv());
}
