use sgur::eval::model::initial_table;
use sgur::eval::{
    evaluate, split_cold_start, split_random, train_reference_model, EvalSplit, Projection, RefModelConfig, SplitPart,
    UserInitMode,
};
use sgur::synth::{gaussian_init, planted_corpus, PlantedParams};
use sgur::Matrix;

fn small() -> (EvalSplit, Matrix) {
    let c = planted_corpus(&PlantedParams {
        num_users: 50,
        num_items: 60,
        dim: 16,
        ..PlantedParams::default()
    });
    (split_random(&c.graph, (0.8, 0.1, 0.1), 2).unwrap(), c.features.into_matrix())
}

fn config(seed: u64) -> RefModelConfig {
    RefModelConfig {
        embed_dim: 16,
        max_epochs: 8,
        seed,
        ..RefModelConfig::default()
    }
}

#[test]
fn training_is_bitwise_reproducible() {
    let (split, items) = small();
    let a = train_reference_model(&split, &items, &config(3)).unwrap();
    let b = train_reference_model(&split, &items, &config(3)).unwrap();
    assert_eq!(a, b);
    let c = train_reference_model(&split, &items, &config(4)).unwrap();
    assert_ne!(a.loss_trace, c.loss_trace);
}

#[test]
fn loss_goes_down() {
    let (split, items) = small();
    let out = train_reference_model(&split, &items, &RefModelConfig { max_epochs: 30, patience: 30, ..config(0) }).unwrap();
    assert_eq!(out.epochs_run, 30);
    assert!(out.loss_trace[29] < out.loss_trace[0]);
    assert!(out.loss_trace[0] <= out.initial_loss + 1e-6);
    assert!(out.best_epoch >= 1 && out.best_epoch <= 30);
    assert_eq!(out.val_trace.len(), 30);
    assert!(out.loss_csv().starts_with("epoch,loss\n1,"));
}

#[test]
fn provided_user_init_lands_in_the_table() {
    let (split, items) = small();
    let users = gaussian_init(split.num_users, 16, 9);
    let cfg = RefModelConfig {
        init: UserInitMode::Provided(users.clone()),
        ..config(0)
    };
    let table = initial_table(&split, &items, &cfg).unwrap();
    assert_eq!(table.len(), (split.num_users + split.num_items) * 16);
    assert_eq!(table[..16].iter().map(|&x| x as f32).collect::<Vec<_>>(), users.row(0));
    assert_eq!(table[split.num_users * 16] as f32, items.row(0)[0]);

    let short = gaussian_init(split.num_users - 1, 16, 9);
    let bad = RefModelConfig {
        init: UserInitMode::Provided(short),
        ..config(0)
    };
    assert!(train_reference_model(&split, &items, &bad).is_err());
}

#[test]
fn projections_map_feature_width_to_embed_dim() {
    let (split, items) = small();
    let narrow = RefModelConfig { embed_dim: 8, ..config(0) };
    assert!(initial_table(&split, &items, &narrow).is_err(), "identity needs matching widths");
    for projection in [Projection::Truncate, Projection::Gaussian { seed: 5 }] {
        let cfg = RefModelConfig { projection, ..narrow.clone() };
        let table = initial_table(&split, &items, &cfg).unwrap();
        assert_eq!(table.len(), (split.num_users + split.num_items) * 8);
        assert_eq!(initial_table(&split, &items, &cfg).unwrap(), table);
    }
}

#[test]
fn evaluation_reports_requested_cutoffs() {
    let (split, items) = small();
    let out = train_reference_model(&split, &items, &config(1)).unwrap();
    let m = evaluate(&out.embeddings, &split, &[1, 5, 20]).unwrap();
    assert_eq!(m.recall.keys().copied().collect::<Vec<_>>(), vec![1, 5, 20]);
    assert!(m.recall[&1] <= m.recall[&5] && m.recall[&5] <= m.recall[&20]);
    assert!(m.ndcg.values().all(|v| (0.0..=1.0).contains(v)));
    assert!(m.users_evaluated > 0);

    let mut no_test = split.clone();
    no_test.test.clear();
    assert!(evaluate(&out.embeddings, &no_test, &[10]).is_err());
}

#[test]
fn split_files_round_trip() {
    let (split, _) = small();
    let dir = tempfile::tempdir().unwrap();
    split.write(dir.path()).unwrap();
    assert_eq!(EvalSplit::read(dir.path()).unwrap(), split);

    let c = planted_corpus(&PlantedParams::default());
    let cold = split_cold_start(&c.graph, 0.2, 1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    cold.write(dir.path()).unwrap();
    let back = EvalSplit::read(dir.path()).unwrap();
    assert_eq!(back, cold);
    assert!(back.part(SplitPart::Train).iter().all(|e| !cold.cold_items.contains(&e.1)));
}

#[test]
fn split_reader_rejects_overlap() {
    let (mut split, _) = small();
    let dup = split.train[0];
    split.test.push(dup);
    let dir = tempfile::tempdir().unwrap();
    split.write(dir.path()).unwrap();
    assert!(EvalSplit::read(dir.path()).is_err());
}
