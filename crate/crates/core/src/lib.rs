//! Training-free user embedding initialization for multimodal recommenders.
//!
//! Item embeddings in multimodal recommenders usually start from pretrained modality
//! features, while user embeddings start random. This crate builds per-modality user
//! tables from the features of the items each user interacted with, mixing a
//! degree-weighted item-level sum with the same sum over K-Means centroids, and provides
//! a small harness (splits, ranking metrics, a reference propagation model) to measure
//! what that buys.
//!
//! ```no_run
//! use std::path::Path;
//! use sgur::{corpus, init};
//!
//! let (graph, _vocab) = corpus::load_interactions(Path::new("interactions.tsv"))?;
//! let visual = corpus::load_features(Path::new("visual.sgur"), "visual")?;
//! let users = init::init_users(&graph, &[visual], &init::InitConfig::default(), 0)?;
//! users.write(Path::new("out"))?;
//! # Ok::<(), sgur::Error>(())
//! ```

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod cluster;
pub mod corpus;
mod error;
pub mod eval;
pub mod init;
pub mod manifest;
pub mod matrix;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
