//! Two modalities, one interaction file, three K-Means seeds.
//!
//! cargo run --example init_pipeline -- /tmp/sgur-demo

use std::error::Error;
use std::fs;
use std::path::PathBuf;

use sgur::corpus::{load_features, load_interactions, write_features, write_interactions, ModalityFeatures, Vocab};
use sgur::init::{init_users_multiseed, InitConfig};
use sgur::synth::{planted_corpus, unit_sphere, PlantedParams};
use sgur::Matrix;

fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir).join("init_pipeline");
    fs::create_dir_all(&dir)?;

    let corpus = planted_corpus(&PlantedParams::default());
    let n_items = corpus.graph.num_items();
    write_interactions(&corpus.graph, &Vocab::identity(corpus.graph.num_users(), n_items), &dir.join("interactions.tsv"))?;

    // loading assigns item indices in first-seen order, so feature rows must follow the vocab
    let (graph, vocab) = load_interactions(&dir.join("interactions.tsv"))?;
    let original: Vec<usize> = (0..vocab.items.len()).map(|j| vocab.items.id_of(j).unwrap().parse().unwrap()).collect();
    let reorder = |m: &Matrix| Matrix::from_rows(&original.iter().map(|&i| m.row(i).to_vec()).collect::<Vec<_>>());
    let text = unit_sphere(n_items, 12, 1);
    write_features(&ModalityFeatures::new("visual", reorder(corpus.features.matrix())?)?, &dir.join("visual.sgur"))?;
    write_features(&ModalityFeatures::new("text", reorder(&text)?)?, &dir.join("text.sgur"))?;

    let features = [
        load_features(&dir.join("visual.sgur"), "visual")?,
        load_features(&dir.join("text.sgur"), "text")?,
    ];
    let mut config = InitConfig {
        seeds: vec![0, 1, 2],
        ..InitConfig::default()
    };
    config.k_per_modality.insert("text".into(), 8);

    let started = std::time::Instant::now();
    let runs = init_users_multiseed(&graph, &features, &config)?;
    println!(
        "{} users x {} modalities x {} seeds in {:.1?}",
        graph.num_users(),
        features.len(),
        runs.len(),
        started.elapsed()
    );

    for run in &runs {
        let out = dir.join(format!("seed-{}", run.seed));
        fs::create_dir_all(&out)?;
        for path in run.write(&out)? {
            println!("  {}", path.display());
        }
    }
    vocab.users.write(&dir.join("users.vocab"))?;
    vocab.items.write(&dir.join("items.vocab"))?;
    Ok(())
}
