//! Training loss of the reference model from a random user table vs an initialized one.
//!
//! cargo run --release --example convergence

use sgur::eval::{evaluate, split_random, train_reference_model, RefModelConfig, UserInitMode};
use sgur::init::{init_users, InitConfig};
use sgur::synth::{planted_corpus, PlantedParams};

fn main() -> sgur::Result<()> {
    let corpus = planted_corpus(&PlantedParams::default());
    let split = split_random(&corpus.graph, (0.8, 0.1, 0.1), 7)?;
    let items = corpus.features.matrix();

    // only training edges may feed the initialization
    let users = init_users(&split.train_graph(), std::slice::from_ref(&corpus.features), &InitConfig::default(), 0)?;
    let users = users.get("planted").unwrap().clone();

    let epochs = 60;
    let base = RefModelConfig {
        max_epochs: epochs,
        patience: epochs,
        ..RefModelConfig::default()
    };
    let random = train_reference_model(&split, items, &base)?;
    let init = train_reference_model(
        &split,
        items,
        &RefModelConfig {
            init: UserInitMode::Provided(users),
            ..base.clone()
        },
    )?;

    println!("epoch   random  initialized");
    for e in (0..epochs).step_by(5) {
        println!("{:>5}  {:.4}  {:.4}", e + 1, random.loss_trace[e], init.loss_trace[e]);
    }
    let target = random.loss_trace[29];
    println!(
        "\nrandom reaches {target:.4} at epoch 30; initialized gets there at epoch {:?}",
        init.epochs_to_reach(target)
    );
    for (name, run) in [("random", &random), ("initialized", &init)] {
        let m = evaluate(&run.embeddings, &split, &[10, 20])?;
        println!(
            "{name:<12} best epoch {:>3}  recall@10 {:.4}  ndcg@10 {:.4}",
            run.best_epoch, m.recall[&10], m.ndcg[&10]
        );
    }
    Ok(())
}
