//! Desk-scale evaluation: data splits, ranking metrics, and a reference propagation model.

pub mod metrics;
pub mod model;
pub mod split;

pub use metrics::{ndcg_at_k, recall_at_k, Metric, RankingMetrics, RunMetrics};
pub use model::{
    evaluate, evaluate_run, train_reference_model, Embeddings, Projection, RefModelConfig, TrainOutcome,
    UserInitMode,
};
pub use split::{split_cold_start, split_random, EvalSplit, SplitPart};
