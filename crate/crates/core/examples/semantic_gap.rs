//! Row-norm gap between user tables and item features, for a few initializations.

use sgur::analysis::semantic_gap;
use sgur::corpus::ModalityFeatures;
use sgur::init::{init_users, InitConfig, WeightingStrategy};
use sgur::synth::{gaussian_init, random_graph, unit_sphere};
use sgur::Matrix;

fn main() -> sgur::Result<()> {
    let items = unit_sphere(300, 32, 1);
    let graph = random_graph(200, 300, 5, 15, 2);
    let features = [ModalityFeatures::new("v", items.clone())?];

    let mut tables: Vec<(String, Matrix)> = vec![
        ("gaussian 1/sqrt(d)".into(), gaussian_init(200, 32, 3)),
        ("zeros".into(), Matrix::zeros(200, 32)),
    ];
    for weighting in WeightingStrategy::ALL {
        let config = InitConfig {
            weighting,
            ..InitConfig::default()
        };
        let users = init_users(&graph, &features, &config, 0)?;
        tables.push((format!("sg {weighting}"), users.get("v").unwrap().clone()));
    }

    println!("{:<22} {:>8} {:>8} {:>8}", "init", "user mu", "item mu", "|dmu|");
    for (name, users) in &tables {
        let gap = semantic_gap(users, &items, 20)?;
        println!(
            "{name:<22} {:>8.4} {:>8.4} {:>8.4}",
            gap.user_mean_norm, gap.item_mean_norm, gap.abs_mean_diff
        );
    }

    let gap = semantic_gap(&tables[2].1, &items, 10)?;
    print!("\n{}", gap.histogram_csv());
    Ok(())
}
