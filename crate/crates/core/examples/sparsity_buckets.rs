//! Test recall per user-activity bucket, random vs initialized user table.
//!
//! cargo run --release --example sparsity_buckets

use std::collections::HashSet;

use sgur::analysis::{group_by_sparsity, DEFAULT_SPARSITY_EDGES};
use sgur::eval::model::rank_items;
use sgur::eval::{recall_at_k, split_random, train_reference_model, Embeddings, EvalSplit, RefModelConfig, SplitPart, UserInitMode};
use sgur::init::{init_users, InitConfig};
use sgur::synth::{planted_corpus, PlantedParams};

fn bucket_recall(emb: &Embeddings, split: &EvalSplit, users: &[usize]) -> Option<f64> {
    let train = split.user_items(SplitPart::Train);
    let test = split.user_items(SplitPart::Test);
    let scores: Vec<f64> = users
        .iter()
        .filter_map(|&u| {
            let relevant: HashSet<usize> = test[u].iter().copied().collect();
            let ranked = rank_items(emb, u, &train[u].iter().copied().collect());
            recall_at_k(&ranked, &relevant, 10)
        })
        .collect();
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

fn main() -> sgur::Result<()> {
    let corpus = planted_corpus(&PlantedParams {
        min_degree: 2,
        max_degree: 30,
        ..PlantedParams::default()
    });
    let split = split_random(&corpus.graph, (0.8, 0.1, 0.1), 3)?;
    let train = split.train_graph();
    let buckets = group_by_sparsity(&train, &DEFAULT_SPARSITY_EDGES)?;

    let users = init_users(&train, std::slice::from_ref(&corpus.features), &InitConfig::default(), 0)?;
    let random = train_reference_model(&split, corpus.features.matrix(), &RefModelConfig::default())?;
    let init = train_reference_model(
        &split,
        corpus.features.matrix(),
        &RefModelConfig {
            init: UserInitMode::Provided(users.get("planted").unwrap().clone()),
            ..RefModelConfig::default()
        },
    )?;

    println!("{:<8} {:>6} {:>10} {:>12}", "train deg", "users", "random", "initialized");
    for b in 0..buckets.num_buckets() {
        let members = buckets.members(b);
        let fmt = |r: Option<f64>| r.map_or("-".to_owned(), |v| format!("{v:.4}"));
        println!(
            "{:<9} {:>6} {:>10} {:>12}",
            buckets.label(b),
            members.len(),
            fmt(bucket_recall(&random.embeddings, &split, &members)),
            fmt(bucket_recall(&init.embeddings, &split, &members)),
        );
    }
    Ok(())
}
