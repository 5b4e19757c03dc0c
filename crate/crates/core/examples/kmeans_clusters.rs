//! K-Means on item features, persisted and reloaded, then snapped to centroids.

use sgur::cluster::{align_to_clusters, kmeans, ClusterModel, KMeansParams};
use sgur::corpus::ModalityFeatures;
use sgur::synth::{planted_corpus, PlantedParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = planted_corpus(&PlantedParams {
        groups: 4,
        ..PlantedParams::default()
    });
    let features: &ModalityFeatures = &corpus.features;

    for k in [2, 4, 8] {
        let model = kmeans(features, &KMeansParams::new(k, 0))?;
        println!(
            "k={k}: objective {:.3} after {} iterations (trace {:?})",
            model.objective,
            model.iterations_run,
            model.objective_trace.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()
        );
    }

    // with k = groups the planted structure should come back almost perfectly
    let model = kmeans(features, &KMeansParams::new(4, 0))?;
    let mut agree = 0;
    for a in 0..features.num_items() {
        for b in a + 1..features.num_items() {
            let same_group = corpus.item_group[a] == corpus.item_group[b];
            let same_cluster = model.assignments[a] == model.assignments[b];
            agree += usize::from(same_group == same_cluster);
        }
    }
    let pairs = features.num_items() * (features.num_items() - 1) / 2;
    println!("pair agreement with planted groups: {:.3}", agree as f64 / pairs as f64);

    let dir = tempfile_dir();
    model.save(&dir, "kmeans.planted")?;
    let back = ClusterModel::load(&dir, "kmeans.planted")?;
    assert!(back.centroids.bitwise_eq(&model.centroids));

    let aligned = align_to_clusters(features, &back)?;
    let distinct: std::collections::HashSet<Vec<u32>> = aligned
        .matrix()
        .iter_rows()
        .map(|r| r.iter().map(|x| x.to_bits()).collect())
        .collect();
    println!("aligned table has {} distinct rows", distinct.len());
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("sgur_kmeans_example");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
