//! Interaction graphs, per-modality item features, and their on-disk formats.

mod graph;
pub mod io;
mod vocab;

pub use graph::InteractionGraph;
pub use io::{
    load_features, load_interactions, parse_interactions, read_tensor, write_features, write_interactions, write_tensor,
};
pub use vocab::{IdMap, Vocab};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Item feature table for one modality: `num_items × dim`, all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalityFeatures {
    modality: String,
    matrix: Matrix,
}

impl ModalityFeatures {
    pub fn new(modality: impl Into<String>, matrix: Matrix) -> Result<Self> {
        matrix.ensure_finite()?;
        Ok(ModalityFeatures {
            modality: modality.into(),
            matrix,
        })
    }

    pub fn modality(&self) -> &str {
        &self.modality
    }

    pub fn num_items(&self) -> usize {
        self.matrix.rows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn check_items(&self, graph: &InteractionGraph) -> Result<()> {
        if self.num_items() != graph.num_items() {
            return Err(Error::DimensionMismatch {
                context: "feature rows vs graph items",
                expected: graph.num_items(),
                found: self.num_items(),
            });
        }
        Ok(())
    }
}
