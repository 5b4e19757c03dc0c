//! Sweep of the fusion weight, from item-level only (0) to cluster-level only (1).
//!
//! cargo run --release --example ablation

use sgur::eval::{evaluate, split_random, train_reference_model, RankingMetrics, RefModelConfig, UserInitMode};
use sgur::init::{init_users, InitConfig};
use sgur::synth::{planted_corpus, PlantedParams};

fn main() -> sgur::Result<()> {
    let corpus = planted_corpus(&PlantedParams::default());
    let split = split_random(&corpus.graph, (0.8, 0.1, 0.1), 7)?;
    let train = split.train_graph();
    let seeds = 0..5u64;

    let mut rows = Vec::new();
    let mut random = Vec::new();
    for seed in seeds.clone() {
        let config = RefModelConfig {
            seed,
            ..RefModelConfig::default()
        };
        let run = train_reference_model(&split, corpus.features.matrix(), &config)?;
        random.push(evaluate(&run.embeddings, &split, &[10])?);
    }
    rows.push(("random".to_owned(), RankingMetrics::new(random)));

    for lambda in [0.0, 0.01, 0.1, 0.5, 1.0] {
        let mut runs = Vec::new();
        for seed in seeds.clone() {
            let init = InitConfig {
                lambda,
                ..InitConfig::default()
            };
            let users = init_users(&train, std::slice::from_ref(&corpus.features), &init, seed)?;
            let config = RefModelConfig {
                seed,
                init: UserInitMode::Provided(users.get("planted").unwrap().clone()),
                ..RefModelConfig::default()
            };
            let run = train_reference_model(&split, corpus.features.matrix(), &config)?;
            runs.push(evaluate(&run.embeddings, &split, &[10])?);
        }
        rows.push((format!("lambda={lambda}"), RankingMetrics::new(runs)));
    }

    for (name, m) in &rows {
        println!(
            "{name:<12} recall@10 {:.4} +- {:.4}",
            m.mean(sgur::eval::Metric::Recall, 10).unwrap(),
            m.std(sgur::eval::Metric::Recall, 10).unwrap()
        );
    }
    Ok(())
}
